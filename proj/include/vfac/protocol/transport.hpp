#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>

#include "vfac/protocol/wire.hpp"

namespace vfac::protocol {

// A request/response link to one service. Failures to reach the peer
// throw Error(kTransportError); a remote ErrorReply comes back as a
// message and is rethrown by unpack().
class Channel {
 public:
  virtual ~Channel() = default;
  virtual WireMessage call(const WireMessage& request) = 0;
};

template <typename Reply, typename Request>
Reply call(Channel& ch, const Request& req) {
  return unpack<Reply>(ch.call(pack(req)));
}

// Loopback that still goes through frame encoding in both directions, so
// tests over it exercise the same bytes as TCP.
class InprocChannel : public Channel {
 public:
  explicit InprocChannel(Handler handler) : handler_(std::move(handler)) {}
  WireMessage call(const WireMessage& request) override;

 private:
  Handler handler_;
};

// Serves `handler` on a loopback TCP port. Requests are handled by a small
// thread pool; each connection carries any number of sequential frames.
class TcpServer {
 public:
  // port 0 picks a free port.
  TcpServer(Handler handler, std::uint16_t port = 0, const std::string& host = "127.0.0.1",
            unsigned threads = 4);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const;
  void stop();
  // Blocks until stop() is called from another thread or a signal.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One persistent connection, reopened after a failure. Calls are
// serialized.
class TcpChannel : public Channel {
 public:
  TcpChannel(std::string host, std::uint16_t port);
  ~TcpChannel() override;
  WireMessage call(const WireMessage& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vfac::protocol
