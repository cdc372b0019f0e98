#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "oblivgm/bytes.hpp"

namespace oblivgm {

enum class OpTag : std::uint16_t {
  Hello = 1,
  Setup = 2,
  Reshare = 3,
  Open = 4,
  Shuffle = 5,
  Echo = 6,
  Query = 7,
  Result = 8,
  Error = 9,
};

/// Wire frame: "OGMF", u32 session, u32 round, u16 op-tag, u32 length, payload.
struct Frame {
  std::uint32_t session = 0;
  std::uint32_t round = 0;
  OpTag op = OpTag::Echo;
  Bytes payload;
};

inline constexpr std::size_t kFrameHeaderSize = 18;

Bytes encode_frame(const Frame& frame);
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Reliable, ordered, bidirectional byte-frame channel to one peer.
class Link {
 public:
  virtual ~Link() = default;
  virtual void send(Bytes frame) = 0;
  /// Blocks for the next frame; throws ProtocolError on close or timeout.
  virtual Bytes recv() = 0;
  virtual void close() = 0;
};

using LinkPtr = std::unique_ptr<Link>;

/// Default receive timeout for every transport.
inline constexpr std::chrono::seconds kRecvTimeout{300};

/// Connected pair of in-process links.
std::pair<LinkPtr, LinkPtr> make_memory_link_pair();

/// Links of one party: to its next and previous party.
struct PartyLinks {
  LinkPtr next;
  LinkPtr prev;
};

/// In-process ring: element i belongs to party i+1.
std::array<PartyLinks, 3> make_memory_ring();

/// "host:port" split; throws ValidationError on malformed input.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

class TcpListener {
 public:
  explicit TcpListener(const std::string& endpoint);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  LinkPtr accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Dials with retries until `timeout` passes.
LinkPtr tcp_connect(const std::string& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(20));

/// Builds the ring for `party` over TCP. Lower-index parties dial higher ones
/// and announce themselves with a HELLO frame; `peers[j]` is party j+1's address.
PartyLinks connect_tcp_ring(int party, TcpListener& listener, const std::array<std::string, 3>& peers);

}  // namespace oblivgm
