#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "oblivgm/errors.hpp"
#include "oblivgm/net.hpp"

namespace oblivgm {

namespace {

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    auto w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    auto r = ::recv(fd, data, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    data += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

class TcpLink final : public Link {
 public:
  explicit TcpLink(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    reader_ = std::thread([this] { read_loop(); });
  }

  ~TcpLink() override {
    close();
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  void send(Bytes frame) override {
    std::lock_guard lock(write_mu_);
    if (!write_all(fd_, frame.data(), frame.size())) throw ProtocolError("send failed: peer disconnected");
  }

  Bytes recv() override {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, kRecvTimeout, [&] { return !queue_.empty() || closed_; }))
      throw ProtocolError("receive timed out");
    if (queue_.empty()) throw ProtocolError("peer closed the connection");
    auto b = std::move(queue_.front());
    queue_.pop_front();
    return b;
  }

  void close() override {
    {
      std::lock_guard lock(mu_);
      if (shut_) return;
      shut_ = true;
    }
    ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  void read_loop() {
    for (;;) {
      Bytes frame(kFrameHeaderSize);
      if (!read_all(fd_, frame.data(), kFrameHeaderSize)) break;
      std::uint32_t len = 0;
      for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(frame[14 + i]) << (8 * i);
      frame.resize(kFrameHeaderSize + len);
      if (len > 0 && !read_all(fd_, frame.data() + kFrameHeaderSize, len)) break;
      {
        std::lock_guard lock(mu_);
        queue_.push_back(std::move(frame));
      }
      cv_.notify_one();
    }
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  int fd_;
  std::mutex write_mu_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> queue_;
  bool closed_ = false;
  bool shut_ = false;
  std::thread reader_;
};

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  auto port_s = std::to_string(port);
  int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port_s.c_str(), &hints, &res);
  if (rc != 0) throw ProtocolError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  return res;
}

Frame hello(int party) { return Frame{0, 0, OpTag::Hello, Bytes{static_cast<std::uint8_t>(party)}}; }

}  // namespace

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) throw ValidationError("endpoint must be host:port, got " + endpoint);
  auto host = endpoint.substr(0, colon);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(endpoint.substr(colon + 1), &used);
    if (used != endpoint.size() - colon - 1) throw ValidationError("bad port");
  } catch (const std::exception&) {
    throw ValidationError("bad port in endpoint " + endpoint);
  }
  if (port > 65535) throw ValidationError("port out of range in " + endpoint);
  return {host, static_cast<std::uint16_t>(port)};
}

TcpListener::TcpListener(const std::string& endpoint) {
  auto [host, port] = parse_endpoint(endpoint);
  auto* res = resolve(host, port, true);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    ::freeaddrinfo(res);
    throw ProtocolError("socket() failed");
  }
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd_, 16) != 0) {
    ::freeaddrinfo(res);
    ::close(fd_);
    throw ProtocolError("cannot listen on " + endpoint + ": " + std::strerror(errno));
  }
  ::freeaddrinfo(res);
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

LinkPtr TcpListener::accept() {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpLink>(fd);
    if (errno != EINTR) throw ProtocolError(std::string("accept failed: ") + std::strerror(errno));
  }
}

LinkPtr tcp_connect(const std::string& endpoint, std::chrono::milliseconds timeout) {
  auto [host, port] = parse_endpoint(endpoint);
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto* res = resolve(host, port, false);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpLink>(fd);
    }
    ::freeaddrinfo(res);
    if (fd >= 0) ::close(fd);
    if (std::chrono::steady_clock::now() >= deadline) throw ProtocolError("cannot reach peer " + endpoint);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

PartyLinks connect_tcp_ring(int party, TcpListener& listener, const std::array<std::string, 3>& peers) {
  if (party < 1 || party > 3) throw ValidationError("party index must be 1, 2 or 3");
  std::array<LinkPtr, 4> links;
  for (int j = party + 1; j <= 3; ++j) {
    links[j] = tcp_connect(peers[j - 1]);
    links[j]->send(encode_frame(hello(party)));
  }
  for (int n = 1; n < party; ++n) {
    auto link = listener.accept();
    auto f = decode_frame(link->recv());
    if (f.op != OpTag::Hello || f.payload.size() != 1) throw ProtocolError("expected HELLO from peer");
    int from = f.payload[0];
    if (from < 1 || from >= party || links[from]) throw ProtocolError("HELLO from unexpected party " + std::to_string(from));
    links[from] = std::move(link);
  }
  int next = party % 3 + 1;
  int prev = (party + 1) % 3 + 1;
  return PartyLinks{std::move(links[next]), std::move(links[prev])};
}

}  // namespace oblivgm
