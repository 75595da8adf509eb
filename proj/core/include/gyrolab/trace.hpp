#pragma once

// Flat CSV traces and their JSON sidecar.
//
// The trace has one header row and one row per emitted record; floats use 17
// significant digits so every value parses back to the same double. The
// sidecar (<trace>.meta.json) stores the session config, its SHA-256 and the
// inputs applied during the run, which is everything replay needs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gyrolab/session.hpp"

namespace gyrolab::trace {

inline constexpr const char* kHeader =
    "tick,t,axle_x,axle_y,axle_z,theta,phase,L_x,L_y,L_z,tau_x,tau_y,tau_z,"
    "fA_x,fA_y,fA_z,fB_x,fB_y,fB_z,pA_x,pA_y,pA_z,pB_x,pB_y,pB_z";
inline constexpr std::size_t kColumns = 25;

/// One data row, without the trailing LF.
std::string format_row(const TraceRecord& record);

/// Parses a data row. `line` is the 1-based file line used in errors.
/// The spin rate is not part of the trace and comes back as zero.
TraceRecord parse_row(std::string_view row, std::size_t line);

/// Streams a header and then rows; LF line endings.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void write(const TraceRecord& record);
  std::size_t rows() const { return rows_; }

 private:
  std::ostream& out_;
  std::size_t rows_ = 0;
};

struct TraceRow {
  std::size_t line = 0;  // 1-based file line
  std::string text;
  TraceRecord record;
};

struct TraceFile {
  std::vector<TraceRow> rows;
  bool truncated = false;  // last row lacked its LF and was dropped
};

/// Reads a trace. A zero-byte file yields no rows. A final row with no LF is
/// treated as truncation; any complete malformed row throws ParseError.
TraceFile read_trace(std::istream& in);
TraceFile read_trace(const std::filesystem::path& path);

struct TraceMeta {
  SessionConfig config;
  std::string config_hash;  // as stored; may disagree with the config
  std::vector<SessionEvent> events;
};

std::filesystem::path meta_path(const std::filesystem::path& trace_path);

void write_meta(const std::filesystem::path& path, const SessionConfig& config,
                const std::vector<SessionEvent>& events);
TraceMeta read_meta(const std::filesystem::path& path);

/// Drives a session for `ticks` ticks, writing the trace and its sidecar.
/// Returns the emitted records. Propagates NumericalBlowup after flushing
/// what was produced so far.
std::vector<TraceRecord> record(Session& session, std::int64_t ticks,
                                const std::filesystem::path& trace_path);

struct ReplayResult {
  bool identical = true;
  std::size_t records_compared = 0;
  std::optional<std::size_t> divergent_record;  // 1-based data record
  std::optional<std::int64_t> divergent_tick;
  bool truncated = false;
};

/// Rebuilds the session from the sidecar, re-applies the logged inputs and
/// compares every regenerated row with the file, byte for byte.
/// Throws kConfigMismatch when the stored hash does not match the config.
ReplayResult replay(const TraceMeta& meta, const TraceFile& trace);
ReplayResult replay(const std::filesystem::path& trace_path);

}  // namespace gyrolab::trace
