#include "oblivgm/net.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>

#include "oblivgm/errors.hpp"

namespace oblivgm {

Bytes encode_frame(const Frame& frame) {
  ByteWriter w;
  w.raw("OGMF");
  w.u32(frame.session);
  w.u32(frame.round);
  w.u16(static_cast<std::uint16_t>(frame.op));
  w.u32(static_cast<std::uint32_t>(frame.payload.size()));
  w.raw(frame.payload);
  return std::move(w).take();
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  try {
    r.expect_magic("OGMF");
  } catch (const ValidationError&) {
    throw ProtocolError("frame without OGMF magic");
  }
  Frame f;
  f.session = r.u32();
  f.round = r.u32();
  f.op = static_cast<OpTag>(r.u16());
  auto len = r.u32();
  if (r.remaining() != len) throw ProtocolError("frame length field does not match payload");
  auto body = r.raw(len);
  f.payload.assign(body.begin(), body.end());
  return f;
}

namespace {

struct Mailbox {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> queue;
  bool closed = false;

  void push(Bytes b) {
    {
      std::lock_guard lock(mu);
      if (closed) throw ProtocolError("link closed");
      queue.push_back(std::move(b));
    }
    cv.notify_one();
  }

  Bytes pop() {
    std::unique_lock lock(mu);
    if (!cv.wait_for(lock, kRecvTimeout, [&] { return !queue.empty() || closed; }))
      throw ProtocolError("receive timed out");
    if (queue.empty()) throw ProtocolError("peer closed the link");
    auto b = std::move(queue.front());
    queue.pop_front();
    return b;
  }

  void close() {
    {
      std::lock_guard lock(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class MemoryLink final : public Link {
 public:
  MemoryLink(std::shared_ptr<Mailbox> in, std::shared_ptr<Mailbox> out) : in_(std::move(in)), out_(std::move(out)) {}
  ~MemoryLink() override { close(); }

  void send(Bytes frame) override { out_->push(std::move(frame)); }
  Bytes recv() override { return in_->pop(); }
  void close() override {
    in_->close();
    out_->close();
  }

 private:
  std::shared_ptr<Mailbox> in_;
  std::shared_ptr<Mailbox> out_;
};

}  // namespace

std::pair<LinkPtr, LinkPtr> make_memory_link_pair() {
  auto ab = std::make_shared<Mailbox>();
  auto ba = std::make_shared<Mailbox>();
  return {std::make_unique<MemoryLink>(ba, ab), std::make_unique<MemoryLink>(ab, ba)};
}

std::array<PartyLinks, 3> make_memory_ring() {
  std::array<PartyLinks, 3> ring;
  for (int i = 0; i < 3; ++i) {
    auto [here, there] = make_memory_link_pair();
    ring[i].next = std::move(here);
    ring[(i + 1) % 3].prev = std::move(there);
  }
  return ring;
}

}  // namespace oblivgm
