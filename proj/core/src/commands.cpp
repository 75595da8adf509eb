#include "gyrolab/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "gyrolab/config.hpp"
#include "gyrolab/error.hpp"
#include "gyrolab/server.hpp"
#include "gyrolab/session.hpp"
#include "gyrolab/trace.hpp"
#include "gyrolab/verify.hpp"

namespace gyrolab::cli {
namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int cmd_run(const std::string& config_path, double duration_s, const std::string& trace_path,
            std::ostream& out, std::ostream& err) {
  SessionConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
  if (!std::isfinite(duration_s) || duration_s <= 0.0) {
    err << "error: duration must be a positive number of seconds\n";
    return kBadInput;
  }
  const auto ticks = static_cast<std::int64_t>(std::llround(duration_s / config.dt));
  try {
    Session session(config);
    const auto records = trace::record(session, ticks, trace_path);
    out << "ticks " << ticks << ", snapshots " << records.size() << "\n";
    out << "config_hash " << config_hash(config) << "\n";
    out << "trace " << trace_path << "\n";
    return kOk;
  } catch (const NumericalBlowup& e) {
    err << "error: numerical blowup at tick " << e.tick() << ": " << e.what() << "\n";
    return kBlowup;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
}

int cmd_verify(const std::string& config_path, std::ostream& out, std::ostream& err) {
  SessionConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
  try {
    const auto report = verify::run_all(config);
    for (const auto& c : report.checks) {
      out << verify::to_string(c.status) << "  " << c.name;
      if (c.status != verify::Status::kSkipped) {
        out << "  measured " << fmt(c.measured) << "  expected " << fmt(c.expected) << "  tol "
            << fmt(c.tolerance);
      }
      if (!c.detail.empty()) out << "  " << c.detail;
      out << "\n";
    }
    return report.passed() ? kOk : kCheckFailed;
  } catch (const NumericalBlowup& e) {
    err << "error: numerical blowup at tick " << e.tick() << ": " << e.what() << "\n";
    return kBlowup;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
}

int cmd_replay(const std::string& trace_path, std::ostream& out, std::ostream& err) {
  try {
    const auto result = trace::replay(std::filesystem::path(trace_path));
    if (result.truncated) out << "warning: final row is truncated and was not compared\n";
    if (result.identical) {
      out << "identical (" << result.records_compared << " records)\n";
      return kOk;
    }
    out << "diverged at record " << *result.divergent_record << ", tick " << *result.divergent_tick
        << "\n";
    return kCheckFailed;
  } catch (const NumericalBlowup& e) {
    err << "error: numerical blowup at tick " << e.tick() << " during replay\n";
    return kBlowup;
  } catch (const ParseError& e) {
    err << "error: line " << e.line() << ": " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kConfigMismatch ? kHashMismatch : kBadInput;
  }
}

int cmd_serve(const std::string& config_path, std::uint16_t port, std::ostream& out,
              std::ostream& err, const std::function<bool()>& should_stop) {
  gateway::ServerOptions options;
  try {
    options.config = config_path.empty() ? SessionConfig{} : load_config(config_path);
    options.port = port;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
  try {
    gateway::Server server(std::move(options));
    server.start();
    out << "listening on ws://127.0.0.1:" << server.port() << "/" << std::endl;
    while (!should_stop()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
}

}  // namespace gyrolab::cli
