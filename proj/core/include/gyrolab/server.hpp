#pragma once

// WebSocket service for the browser lab. Each connection owns an isolated
// session that a dedicated servo thread advances at the configured rate;
// snapshots fan out at the decimated rate and are dropped, never queued,
// when a client cannot keep up.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gyrolab/config.hpp"

namespace gyrolab::gateway {

struct ServerOptions {
  SessionConfig config;
  std::string address = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  /// When set, every connection writes session-<id>.csv and its sidecar here.
  std::optional<std::filesystem::path> record_dir;
  /// Kernel send buffer per connection; 0 keeps the OS default. A small
  /// buffer makes a slow client shed snapshots sooner.
  int send_buffer_bytes = 0;
};

struct ConnectionStats {
  std::uint64_t id = 0;
  bool open = false;
  std::int64_t ticks = 0;
  double max_lateness_ms = 0.0;  // worst wake-up delay past a tick deadline
  std::uint64_t snapshots_offered = 0;
  std::uint64_t snapshots_sent = 0;
  std::uint64_t snapshots_dropped = 0;
  std::uint64_t messages_received = 0;
};

class Server {
 public:
  /// The config's devices are switched to interactive; pointer messages
  /// drive them.
  explicit Server(ServerOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving on a background thread. Throws kService when
  /// the address or port is unavailable.
  void start();

  /// Closes every connection, flushing recordings, and joins all threads.
  void stop();

  std::uint16_t port() const;
  std::vector<ConnectionStats> stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gyrolab::gateway
