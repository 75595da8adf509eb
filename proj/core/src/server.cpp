#include "gyrolab/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <mutex>
#include <stop_token>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "gyrolab/error.hpp"
#include "gyrolab/protocol.hpp"
#include "gyrolab/session.hpp"
#include "gyrolab/trace.hpp"

namespace gyrolab::gateway {
namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const ServerOptions& options, std::uint64_t id)
      : ws_(std::move(socket)), options_(options), id_(id), session_(options.config),
        requested_(options.config.wheel) {}

  ~Connection() { finish(); }

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(64 * 1024);
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  /// Io thread only.
  void close() {
    if (closed_) return;
    closed_ = true;
    finish();
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).socket().close(ignored);
  }

  ConnectionStats stats() const {
    ConnectionStats s;
    s.id = id_;
    s.open = !finished_.load();
    s.ticks = ticks_.load();
    s.max_lateness_ms = max_lateness_ns_.load() / 1e6;
    s.snapshots_offered = offered_.load();
    s.snapshots_sent = sent_.load();
    s.snapshots_dropped = dropped_.load();
    s.messages_received = received_.load();
    return s;
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) {
      close();
      return;
    }
    if (options_.record_dir) {
      trace_path_ = *options_.record_dir / ("session-" + std::to_string(id_) + ".csv");
      trace_out_.open(*trace_path_, std::ios::binary);
      if (trace_out_) writer_.emplace(trace_out_);
    }
    enqueue_control(serialize(ServerMessage{Hello{to_json(options_.config), kProtocolVersion}}));
    servo_ = std::jthread([self = shared_from_this()](std::stop_token st) { self->servo_loop(st); });
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    ++received_;
    const bool text = ws_.got_text();
    const std::string frame = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    if (!text) {
      reply(ErrorReply{std::nullopt, codes::kMalformed, "binary frames are not supported"});
    } else {
      handle(frame);
    }
    do_read();
  }

  void reply(const ServerMessage& message) { enqueue_control(serialize(message)); }

  void handle(const std::string& frame) {
    ClientMessage message;
    try {
      message = parse_client(frame);
    } catch (const ProtocolError& e) {
      reply(e.reply());
      return;
    }
    std::visit(
        [this](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if (session_.halted()) {
            reply(ErrorReply{m.ref, codes::kHalted, "session halted after a numerical blowup"});
            return;
          }
          try {
            std::int64_t effective = 0;
            if constexpr (std::is_same_v<T, SetParams>) {
              const auto params = m.apply_to(requested_);
              effective = session_.set_params(params);
              requested_ = params;
            } else if constexpr (std::is_same_v<T, Pointer>) {
              effective = session_.stage_pointer(m.device, m.position);
            } else if constexpr (std::is_same_v<T, Start>) {
              paused_ = false;
              effective = session_.next_boundary();
            } else if constexpr (std::is_same_v<T, Pause>) {
              paused_ = true;
              effective = session_.next_boundary();
            } else if constexpr (std::is_same_v<T, Reset>) {
              effective = session_.stage_reset();
              requested_ = options_.config.wheel;
            } else {
              const auto params = preset(m.name, options_.config.wheel);
              if (!params) {
                reply(ErrorReply{m.ref, codes::kUnknownPreset, "unknown preset '" + m.name + "'"});
                return;
              }
              effective = session_.set_params(*params);
              requested_ = *params;
            }
            reply(Ack{m.ref, effective});
          } catch (const Error& e) {
            const char* code = std::is_same_v<T, Pointer> ? codes::kInvalidPointer : codes::kInvalidParams;
            reply(ErrorReply{m.ref, code, e.what()});
          }
        },
        message);
  }

  // Any thread.
  void enqueue_control(std::string text) {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->control_.push_back(std::move(text));
      self->maybe_write();
    });
  }

  // Servo thread. Only the newest snapshot waits; older ones are dropped.
  void offer_snapshot(std::string text) {
    ++offered_;
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      if (self->pending_snapshot_) ++self->dropped_;
      self->pending_snapshot_ = std::move(text);
      self->maybe_write();
    });
  }

  void maybe_write() {
    if (writing_ || closed_) return;
    if (!control_.empty()) {
      outgoing_ = std::move(control_.front());
      control_.pop_front();
      outgoing_is_snapshot_ = false;
    } else if (pending_snapshot_) {
      outgoing_ = std::move(*pending_snapshot_);
      pending_snapshot_.reset();
      outgoing_is_snapshot_ = true;
    } else {
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outgoing_),
                    beast::bind_front_handler(&Connection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    writing_ = false;
    if (ec) {
      close();
      return;
    }
    if (outgoing_is_snapshot_) ++sent_;
    maybe_write();
  }

  void servo_loop(std::stop_token st) {
    const auto period = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(options_.config.dt));
    auto deadline = Clock::now();
    while (!st.stop_requested()) {
      deadline += period;
      std::this_thread::sleep_until(deadline);
      const auto now = Clock::now();
      const auto late = now - deadline;
      const auto late_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(late).count();
      if (late_ns > max_lateness_ns_.load()) max_lateness_ns_ = late_ns;
      if (late > std::chrono::milliseconds(100)) deadline = now;  // resync after a long stall
      if (paused_) continue;
      try {
        auto record = session_.tick();
        ++ticks_;
        if (record) {
          if (writer_) writer_->write(*record);
          offer_snapshot(serialize(ServerMessage{Snapshot{record->snapshot}}));
        }
      } catch (const NumericalBlowup& e) {
        enqueue_control(serialize(ServerMessage{ErrorReply{std::nullopt, codes::kHalted, e.what()}}));
        return;
      }
    }
  }

  // Stops the servo thread and flushes the recording. Idempotent.
  void finish() {
    if (finished_.exchange(true)) return;
    if (servo_.joinable()) {
      servo_.request_stop();
      if (servo_.get_id() == std::this_thread::get_id()) {
        servo_.detach();  // last reference dropped by the servo thread itself
      } else {
        servo_.join();
      }
    }
    if (trace_path_) {
      trace_out_.flush();
      try {
        trace::write_meta(trace::meta_path(*trace_path_), session_.config(), session_.events());
      } catch (const Error&) {
      }
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  const ServerOptions& options_;
  std::uint64_t id_;
  Session session_;
  dynamics::WheelParams requested_;  // io thread
  std::atomic<bool> paused_{false};

  beast::flat_buffer buffer_;
  std::deque<std::string> control_;
  std::optional<std::string> pending_snapshot_;
  std::string outgoing_;
  bool outgoing_is_snapshot_ = false;
  bool writing_ = false;
  bool closed_ = false;

  std::optional<std::filesystem::path> trace_path_;
  std::ofstream trace_out_;
  std::optional<trace::TraceWriter> writer_;

  std::atomic<bool> finished_{false};
  std::atomic<std::int64_t> ticks_{0};
  std::atomic<std::int64_t> max_lateness_ns_{0};
  std::atomic<std::uint64_t> offered_{0};
  std::atomic<std::uint64_t> sent_{0};
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> received_{0};

  std::jthread servo_;
};

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions opts) : options(std::move(opts)), acceptor(ioc) {
    options.config.device_a.kind = DeviceSpec::Kind::kInteractive;
    options.config.device_a.trajectory.clear();
    options.config.device_b.kind = DeviceSpec::Kind::kInteractive;
    options.config.device_b.trajectory.clear();
    options.config.validate();
  }

  void do_accept() {
    acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      if (options.send_buffer_bytes > 0) {
        beast::error_code ignored;
        socket.set_option(net::socket_base::send_buffer_size(options.send_buffer_bytes), ignored);
      }
      auto connection = std::make_shared<Connection>(std::move(socket), options, ++next_id);
      {
        std::lock_guard lock(mutex);
        connections.push_back(connection);
      }
      connection->run();
      do_accept();
    });
  }

  ServerOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::uint64_t next_id = 0;
  bool running = false;

  mutable std::mutex mutex;
  std::vector<std::shared_ptr<Connection>> connections;
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

void Server::start() {
  if (impl_->running) return;
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->options.address, ec);
  if (ec) throw Error(ErrorCode::kService, "bad listen address '" + impl_->options.address + "'");
  const tcp::endpoint endpoint(address, impl_->options.port);
  auto& acceptor = impl_->acceptor;
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    beast::error_code ignored;
    acceptor.close(ignored);
    throw Error(ErrorCode::kService, "cannot listen on " + impl_->options.address + ":" +
                                         std::to_string(impl_->options.port) + ": " + ec.message());
  }
  impl_->running = true;
  impl_->do_accept();
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_ || !impl_->running) return;
  impl_->running = false;
  net::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    std::vector<std::shared_ptr<Connection>> connections;
    {
      std::lock_guard lock(impl_->mutex);
      connections = impl_->connections;
    }
    for (auto& c : connections) c->close();
    impl_->ioc.stop();
  });
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
  std::lock_guard lock(impl_->mutex);
  impl_->connections.clear();
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

std::vector<ConnectionStats> Server::stats() const {
  std::lock_guard lock(impl_->mutex);
  std::vector<ConnectionStats> out;
  for (const auto& c : impl_->connections) out.push_back(c->stats());
  return out;
}

}  // namespace gyrolab::gateway
