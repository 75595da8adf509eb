#include <atomic>
#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "gyrolab/commands.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gyrolab: gyroscope simulator with bimanual haptic feedback"};
  app.require_subcommand(1);

  std::string config;
  std::string out_path;
  std::string trace_path;
  double duration = 10.0;
  std::uint16_t port = 8080;

  auto* run = app.add_subcommand("run", "Simulate headless and record a trace");
  run->add_option("--config", config, "Session config JSON")->required();
  run->add_option("--duration", duration, "Simulated seconds")->required();
  run->add_option("--out", out_path, "Trace CSV; the sidecar is <out>.meta.json")->required();

  auto* verify = app.add_subcommand("verify", "Run the physics self-checks");
  verify->add_option("--config", config, "Session config JSON")->required();

  auto* replay = app.add_subcommand("replay", "Re-simulate a trace and compare");
  replay->add_option("--trace", trace_path, "Trace CSV with its sidecar")->required();

  auto* serve = app.add_subcommand("serve", "Serve the WebSocket protocol");
  serve->add_option("--config", config, "Session config JSON (defaults when omitted)");
  serve->add_option("--port", port, "TCP port on 127.0.0.1")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gyrolab::cli::kBadInput;
  }

  if (*run) return gyrolab::cli::cmd_run(config, duration, out_path, std::cout, std::cerr);
  if (*verify) return gyrolab::cli::cmd_verify(config, std::cout, std::cerr);
  if (*replay) return gyrolab::cli::cmd_replay(trace_path, std::cout, std::cerr);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return gyrolab::cli::cmd_serve(config, port, std::cout, std::cerr, [] { return g_stop.load(); });
}
