#include "vfac/protocol/transport.hpp"

#include <array>
#include <thread>
#include <vector>

#include <boost/asio.hpp>

namespace vfac::protocol {

namespace asio = boost::asio;
using asio::ip::tcp;

WireMessage InprocChannel::call(const WireMessage& request) {
  auto in = decode_frame(encode_frame(request));
  return decode_frame(encode_frame(dispatch(handler_, in)));
}

namespace {

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket socket, const Handler& handler)
      : socket_(std::move(socket)), handler_(handler) {}

  void start() { read_header(); }

 private:
  void read_header() {
    auto self = shared_from_this();
    asio::async_read(socket_, asio::buffer(header_), [this, self](auto ec, std::size_t) {
      if (ec) return;
      try {
        body_.resize(frame_length(header_));
      } catch (const Error&) {
        reply(pack(ErrorReply{Errc::kProtocolError, "bad frame length"}), false);
        return;
      }
      read_body();
    });
  }

  void read_body() {
    auto self = shared_from_this();
    asio::async_read(socket_, asio::buffer(body_), [this, self](auto ec, std::size_t) {
      if (ec) return;
      Bytes frame(header_.begin(), header_.end());
      frame.insert(frame.end(), body_.begin(), body_.end());
      WireMessage response;
      try {
        response = dispatch(handler_, decode_frame(frame));
      } catch (const Error& e) {
        response = pack(ErrorReply{Errc::kProtocolError, e.what()});
      }
      reply(response, true);
    });
  }

  void reply(const WireMessage& m, bool keep_open) {
    auto self = shared_from_this();
    out_ = encode_frame(m);
    asio::async_write(socket_, asio::buffer(out_), [this, self, keep_open](auto ec, std::size_t) {
      if (!ec && keep_open) read_header();
    });
  }

  tcp::socket socket_;
  const Handler& handler_;
  std::array<std::uint8_t, 4> header_{};
  Bytes body_;
  Bytes out_;
};

}  // namespace

struct TcpServer::Impl {
  Handler handler;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::vector<std::thread> threads;
  std::mutex mu;
  bool stopped = false;

  void accept() {
    acceptor.async_accept([this](auto ec, tcp::socket socket) {
      if (ec) return;
      socket.set_option(tcp::no_delay(true));
      std::make_shared<Session>(std::move(socket), handler)->start();
      accept();
    });
  }
};

TcpServer::TcpServer(Handler handler, std::uint16_t port, const std::string& host, unsigned threads)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  try {
    tcp::endpoint ep(asio::ip::make_address(host), port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw Error(Errc::kTransportError, std::string("listen: ") + e.what());
  }
  impl_->accept();
  for (unsigned i = 0; i < std::max(1u, threads); ++i) {
    impl_->threads.emplace_back([this] { impl_->io.run(); });
  }
}

TcpServer::~TcpServer() {
  stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
}

std::uint16_t TcpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void TcpServer::stop() {
  std::lock_guard lock(impl_->mu);
  if (impl_->stopped) return;
  impl_->stopped = true;
  impl_->io.stop();
}

void TcpServer::wait() {
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
}

struct TcpChannel::Impl {
  std::string host;
  std::uint16_t port;
  asio::io_context io;
  std::optional<tcp::socket> socket;
  std::mutex mu;

  tcp::socket& connected() {
    if (!socket) {
      tcp::resolver resolver(io);
      tcp::socket s(io);
      asio::connect(s, resolver.resolve(host, std::to_string(port)));
      s.set_option(tcp::no_delay(true));
      socket.emplace(std::move(s));
    }
    return *socket;
  }
};

TcpChannel::TcpChannel(std::string host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  impl_->host = std::move(host);
  impl_->port = port;
}

TcpChannel::~TcpChannel() = default;

WireMessage TcpChannel::call(const WireMessage& request) {
  std::lock_guard lock(impl_->mu);
  auto frame = encode_frame(request);
  try {
    auto& s = impl_->connected();
    asio::write(s, asio::buffer(frame));
    std::array<std::uint8_t, 4> header{};
    asio::read(s, asio::buffer(header));
    Bytes reply(header.begin(), header.end());
    reply.resize(4 + frame_length(header));
    asio::read(s, asio::buffer(reply.data() + 4, reply.size() - 4));
    return decode_frame(reply);
  } catch (const boost::system::system_error& e) {
    impl_->socket.reset();
    throw Error(Errc::kTransportError, "tcp " + impl_->host + ":" + std::to_string(impl_->port) +
                                           ": " + e.what());
  } catch (const Error&) {
    impl_->socket.reset();
    throw;
  }
}

}  // namespace vfac::protocol
