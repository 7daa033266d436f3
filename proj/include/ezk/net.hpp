#pragma once

// TCP transport. A session opens with a Hello frame (config ‖ instance) from
// the prover and closes with a Verdict frame from the verifier; neither
// counts as a protocol message.

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <string>
#include <thread>

#include "ezk/protocol.hpp"

namespace ezk {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  static Endpoint parse(const std::string& s) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) throw InvalidArgument("endpoint must be host:port");
    Endpoint e;
    e.host = s.substr(0, colon);
    if (e.host.empty()) e.host = "127.0.0.1";
    try {
      const unsigned long p = std::stoul(s.substr(colon + 1));
      if (p > 65535) throw InvalidArgument("endpoint port out of range");
      e.port = static_cast<std::uint16_t>(p);
    } catch (const std::logic_error&) {
      throw InvalidArgument("endpoint port is not a number");
    }
    return e;
  }
  std::string to_string() const { return host + ":" + std::to_string(port); }
};

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

namespace detail {

inline sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{}, *res = nullptr;
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw SessionError("cannot resolve host " + ep.host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

inline void set_timeouts(int fd, int seconds) {
  timeval tv{seconds, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace detail

class FrameChannel {
 public:
  explicit FrameChannel(Socket s, int timeout_seconds = 30) : sock_(std::move(s)) {
    detail::set_timeouts(sock_.fd(), timeout_seconds);
  }

  void send(const ProtocolMessage& m) {
    Bytes f = m.frame();
    std::size_t off = 0;
    while (off < f.size()) {
      const ssize_t n = ::send(sock_.fd(), f.data() + off, f.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw SessionError(std::string("send failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  ProtocolMessage recv() {
    Bytes head = read_exact(4);
    ByteReader hr(head);
    const std::uint32_t len = hr.u32();
    if (len < 2 || len > kMaxMessageBytes) throw SessionError("frame length out of range");
    Bytes body = read_exact(len);
    head.insert(head.end(), body.begin(), body.end());
    try {
      return ProtocolMessage::parse(head);
    } catch (const DecodeError& e) {
      throw SessionError(std::string("bad frame: ") + e.what());
    }
  }

 private:
  Bytes read_exact(std::size_t n) {
    Bytes b(n);
    std::size_t off = 0;
    while (off < n) {
      const ssize_t r = ::recv(sock_.fd(), b.data() + off, n - off, 0);
      if (r < 0 && errno == EINTR) continue;
      if (r == 0) throw SessionError("connection closed");
      if (r < 0) throw SessionError(std::string("recv failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(r);
    }
    return b;
  }

  Socket sock_;
};

inline Socket tcp_connect(const Endpoint& ep) {
  sockaddr_in addr = detail::resolve(ep);
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) throw SessionError("socket() failed");
  if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    throw SessionError("connect to " + ep.to_string() + " failed: " + std::strerror(errno));
  return s;
}

inline Bytes encode_hello(const ProtocolConfig& cfg, const GraphInstance& x) {
  return detail::encode_with([&](ByteWriter& w) {
    cfg.encode(w);
    x.encode(w);
  });
}

inline std::pair<ProtocolConfig, GraphInstance> decode_hello(const Bytes& b) {
  ByteReader r(b);
  ProtocolConfig cfg = ProtocolConfig::decode(r);
  GraphInstance x = GraphInstance::decode(r);
  r.expect_done();
  return {cfg, x};
}

// Prover endpoint: runs one session and returns the verifier's verdict.
inline Verdict prove_over(FrameChannel& ch, const ProtocolConfig& cfg, const GraphInstance& x, const CycleWitness& w,
                          Rng rng, Transcript* transcript = nullptr) {
  ProverSession prover(cfg, x, w, std::move(rng));
  if (transcript) {
    transcript->cfg = cfg;
    transcript->x = x;
  }
  auto out = [&](const ProtocolMessage& m) {
    ch.send(m);
    if (transcript) transcript->frames.push_back(m);
  };
  out(ProtocolMessage{cfg.protocol_id(), MsgType::Hello, encode_hello(cfg, x)});
  for (const auto& m : prover.start()) out(m);
  for (;;) {
    ProtocolMessage m = ch.recv();
    if (transcript) transcript->frames.push_back(m);
    if (m.type == MsgType::Verdict) {
      if (m.payload.size() != 1 || m.payload[0] > 2) throw SessionError("bad verdict frame");
      const auto v = static_cast<Verdict>(m.payload[0]);
      if (transcript) transcript->verdict = v;
      return v;
    }
    for (const auto& o : prover.handle(m)) out(o);
  }
}

struct ServedSession {
  ProtocolConfig cfg;
  Verdict verdict = Verdict::Reject;
  Transcript transcript;
  std::string error;
};

// Verifier endpoint: reads Hello, lints the config, runs to a verdict and
// reports it to the prover.
inline ServedSession verify_over(FrameChannel& ch, Rng rng, const VerifierScript& script = {}) {
  ServedSession s;
  ProtocolMessage hello = ch.recv();
  if (hello.type != MsgType::Hello) throw SessionError("expected hello frame");
  auto [cfg, x] = decode_hello(hello.payload);
  cfg.lint();
  s.cfg = cfg;
  s.transcript.cfg = cfg;
  s.transcript.x = x;
  s.transcript.frames.push_back(hello);
  VerifierSession verifier(cfg, x, std::move(rng), script);
  while (!verifier.verdict()) {
    ProtocolMessage m = ch.recv();
    s.transcript.frames.push_back(m);
    for (const auto& o : verifier.handle(m)) {
      ch.send(o);
      s.transcript.frames.push_back(o);
    }
  }
  s.verdict = *verifier.verdict();
  s.transcript.verdict = s.verdict;
  ProtocolMessage fin{cfg.protocol_id(), MsgType::Verdict, Bytes{static_cast<std::uint8_t>(s.verdict)}};
  ch.send(fin);
  s.transcript.frames.push_back(fin);
  return s;
}

// Verifier server: one thread per connection, no shared mutable state apart
// from the seed splitter and the result log.
class TcpServer {
 public:
  explicit TcpServer(const Endpoint& ep, RngSeed seed) : rng_(seed) {
    sockaddr_in addr = detail::resolve(ep);
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) throw SessionError("socket() failed");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      throw SessionError("bind " + ep.to_string() + " failed: " + std::strerror(errno));
    if (::listen(s.fd(), 16) != 0) throw SessionError("listen failed");
    socklen_t len = sizeof addr;
    ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    listener_ = std::move(s);
  }

  std::uint16_t port() const { return port_; }

  // Serves `max_sessions` connections (0 = forever); returns their outcomes.
  std::vector<ServedSession> run(std::size_t max_sessions, int timeout_seconds = 30) {
    std::vector<std::thread> workers;
    std::vector<ServedSession> results;
    std::mutex mu;
    for (std::size_t k = 0; max_sessions == 0 || k < max_sessions; ++k) {
      const int fd = ::accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        break;
      }
      Rng session_rng = rng_.split();
      workers.emplace_back([fd, timeout_seconds, session_rng, &mu, &results]() mutable {
        ServedSession s;
        try {
          FrameChannel ch(Socket(fd), timeout_seconds);
          s = verify_over(ch, std::move(session_rng));
        } catch (const std::exception& e) {
          s.error = e.what();
        }
        std::lock_guard<std::mutex> lock(mu);
        results.push_back(std::move(s));
      });
    }
    for (auto& t : workers) t.join();
    return results;
  }

 private:
  Socket listener_;
  std::uint16_t port_ = 0;
  Rng rng_;
};

}  // namespace ezk
