#pragma once

// Command-line entry points. Each returns the process exit code and writes
// human-readable output to the given streams.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

namespace gyrolab::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,   // verify check failed or replay diverged
  kBadInput = 2,      // unreadable or invalid config/trace, port unavailable
  kBlowup = 3,        // numerical blowup; the tick is printed
  kHashMismatch = 4,  // replay sidecar config does not match its hash
};

/// Simulates `duration_s` seconds headless and records the trace at
/// `trace_path` with its sidecar next to it.
int cmd_run(const std::string& config_path, double duration_s, const std::string& trace_path,
            std::ostream& out, std::ostream& err);

/// Runs the physics self-checks and prints one line per check.
int cmd_verify(const std::string& config_path, std::ostream& out, std::ostream& err);

/// Re-simulates a recorded trace and prints "identical" or the first
/// divergent record.
int cmd_replay(const std::string& trace_path, std::ostream& out, std::ostream& err);

/// Serves the WebSocket protocol until `should_stop` returns true (polled
/// every 50 ms). An empty config path serves the built-in defaults.
int cmd_serve(const std::string& config_path, std::uint16_t port, std::ostream& out,
              std::ostream& err, const std::function<bool()>& should_stop);

}  // namespace gyrolab::cli
