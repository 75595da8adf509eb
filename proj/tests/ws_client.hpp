#pragma once

// Minimal blocking WebSocket client for the service tests. Reads fail
// instead of hanging: the socket has a receive timeout.

#include <sys/socket.h>
#include <sys/time.h>

#include <chrono>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "gyrolab/protocol.hpp"

namespace gyrolab::test {

class WsClient {
 public:
  explicit WsClient(std::uint16_t port, int receive_buffer_bytes = 0) : ws_(ioc_) {
    namespace net = boost::asio;
    auto& sock = ws_.next_layer();
    sock.open(net::ip::tcp::v4());
    if (receive_buffer_bytes > 0) sock.set_option(net::socket_base::receive_buffer_size(receive_buffer_bytes));
    timeval tv{5, 0};
    ::setsockopt(sock.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    sock.connect({net::ip::make_address("127.0.0.1"), port});
    ws_.handshake("127.0.0.1", "/");
    ws_.text(true);
  }

  ~WsClient() {
    boost::beast::error_code ignored;
    ws_.close(boost::beast::websocket::close_code::normal, ignored);
  }

  void send(const std::string& text) { ws_.write(boost::asio::buffer(text)); }
  void send(const gateway::ClientMessage& m) { send(gateway::serialize(m)); }

  std::string read_text() {
    boost::beast::flat_buffer buffer;
    ws_.read(buffer);
    return boost::beast::buffers_to_string(buffer.data());
  }

  gateway::ServerMessage read() { return gateway::parse_server(read_text()); }

  /// Reads until a message of type T arrives, collecting snapshots on the way.
  template <class T>
  T read_until(std::vector<gateway::Snapshot>* snapshots = nullptr,
               std::chrono::milliseconds limit = std::chrono::seconds(5)) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      auto m = read();
      if (auto* t = std::get_if<T>(&m)) return *t;
      if (snapshots != nullptr) {
        if (auto* s = std::get_if<gateway::Snapshot>(&m)) snapshots->push_back(*s);
      }
    }
    throw std::runtime_error("expected message did not arrive");
  }

 private:
  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::asio::ip::tcp::socket> ws_;
};

}  // namespace gyrolab::test
