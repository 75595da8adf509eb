#include "gyrolab/trace.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gyrolab/error.hpp"

namespace gyrolab::trace {
namespace {

using nlohmann::json;

void append(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.push_back(',');
  out.append(buf, static_cast<std::size_t>(n));
}

void append(std::string& out, const Vec3& v) {
  append(out, v.x());
  append(out, v.y());
  append(out, v.z());
}

double parse_double(std::string_view field, std::size_t line) {
  // strtod accepts everything %.17g produces, including inf/nan spellings.
  std::string owned(field);
  char* end = nullptr;
  const double v = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size()) {
    throw ParseError(line, "malformed number '" + owned + "'");
  }
  return v;
}

}  // namespace

std::string format_row(const TraceRecord& record) {
  const StateSnapshot& s = record.snapshot;
  std::string out = std::to_string(s.tick);
  append(out, s.t);
  append(out, s.axle);
  append(out, s.theta);
  append(out, s.wheel_phase);
  append(out, s.angular_momentum);
  append(out, s.torque);
  append(out, s.force_a);
  append(out, s.force_b);
  append(out, record.pose_a);
  append(out, record.pose_b);
  return out;
}

TraceRecord parse_row(std::string_view row, std::size_t line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = row.find(',', start);
    fields.push_back(row.substr(start, comma == std::string_view::npos ? row.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() != kColumns) {
    throw ParseError(line, "expected " + std::to_string(kColumns) + " columns, found " +
                               std::to_string(fields.size()));
  }
  TraceRecord r;
  StateSnapshot& s = r.snapshot;
  const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), s.tick);
  if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size()) {
    throw ParseError(line, "malformed tick '" + std::string(fields[0]) + "'");
  }
  std::size_t i = 1;
  const auto next = [&]() { return parse_double(fields[i++], line); };
  const auto next_vec = [&]() {
    const double x = next();
    const double y = next();
    const double z = next();
    return Vec3{x, y, z};
  };
  s.t = next();
  s.axle = next_vec();
  s.theta = next();
  s.wheel_phase = next();
  s.angular_momentum = next_vec();
  s.torque = next_vec();
  s.force_a = next_vec();
  s.force_b = next_vec();
  r.pose_a = next_vec();
  r.pose_b = next_vec();
  return r;
}

TraceWriter::TraceWriter(std::ostream& out) : out_(out) { out_ << kHeader << '\n'; }

void TraceWriter::write(const TraceRecord& record) {
  out_ << format_row(record) << '\n';
  ++rows_;
}

TraceFile read_trace(std::istream& in) {
  TraceFile file;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.empty()) return file;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t lf = content.find('\n', pos);
    ++line_no;
    if (lf == std::string::npos) {
      // Cut off mid-row.
      file.truncated = true;
      break;
    }
    std::string_view text(content.data() + pos, lf - pos);
    pos = lf + 1;
    if (line_no == 1) {
      if (text != kHeader) throw ParseError(line_no, "unexpected trace header");
      continue;
    }
    file.rows.push_back({line_no, std::string(text), parse_row(text, line_no)});
  }
  return file;
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot read trace '" + path.string() + "'");
  return read_trace(in);
}

std::filesystem::path meta_path(const std::filesystem::path& trace_path) {
  auto p = trace_path;
  p += ".meta.json";
  return p;
}

void write_meta(const std::filesystem::path& path, const SessionConfig& config,
                const std::vector<SessionEvent>& events) {
  json events_json = json::array();
  for (const auto& e : events) events_json.push_back(to_json(e));
  const json meta{{"format", "gyrolab-trace"},
                  {"version", 1},
                  {"config", to_json(config)},
                  {"config_hash", config_hash(config)},
                  {"events", events_json}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidConfig, "cannot write '" + path.string() + "'");
  out << meta.dump(2) << '\n';
}

TraceMeta read_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot read trace sidecar '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "trace sidecar is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || j.value("format", "") != "gyrolab-trace" || !j.contains("config") ||
      !j.contains("config_hash") || !j.at("config_hash").is_string()) {
    throw Error(ErrorCode::kParse, "not a gyrolab trace sidecar");
  }
  TraceMeta meta{config_from_json(j.at("config")), j.at("config_hash").get<std::string>(), {}};
  if (j.contains("events")) {
    for (const json& e : j.at("events")) meta.events.push_back(event_from_json(e));
  }
  return meta;
}

std::vector<TraceRecord> record(Session& session, std::int64_t ticks,
                                const std::filesystem::path& trace_path) {
  std::ofstream out(trace_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidConfig, "cannot write '" + trace_path.string() + "'");
  TraceWriter writer(out);
  std::vector<TraceRecord> records;
  const auto finish = [&]() {
    out.flush();
    write_meta(meta_path(trace_path), session.config(), session.events());
  };
  try {
    for (std::int64_t i = 0; i < ticks; ++i) {
      if (auto r = session.tick()) {
        writer.write(*r);
        records.push_back(std::move(*r));
      }
    }
  } catch (...) {
    finish();
    throw;
  }
  finish();
  return records;
}

ReplayResult replay(const TraceMeta& meta, const TraceFile& trace) {
  if (config_hash(meta.config) != meta.config_hash) {
    throw Error(ErrorCode::kConfigMismatch, "trace config hash does not match its config");
  }
  ReplayResult result;
  result.truncated = trace.truncated;
  if (trace.rows.empty()) return result;

  Session session(meta.config);
  std::size_t next_event = 0;
  const auto& events = meta.events;
  const std::int64_t last_tick = trace.rows.back().record.snapshot.tick;
  std::size_t row = 0;

  while (row < trace.rows.size() && session.tick_index() < last_tick) {
    const std::int64_t boundary = session.tick_index();
    for (; next_event < events.size() && events[next_event].tick == boundary; ++next_event) {
      std::visit(
          [&session](const auto& input) {
            using T = std::decay_t<decltype(input)>;
            if constexpr (std::is_same_v<T, SessionEvent::Params>) session.set_params(input.params);
            else if constexpr (std::is_same_v<T, SessionEvent::Pointer>)
              session.stage_pointer(input.device, input.position);
            else session.stage_reset();
          },
          events[next_event].input);
    }
    std::optional<TraceRecord> produced;
    try {
      produced = session.tick();
    } catch (const NumericalBlowup&) {
      break;
    }
    if (!produced) continue;
    const TraceRow& expected = trace.rows[row++];
    ++result.records_compared;
    if (format_row(*produced) != expected.text) {
      result.identical = false;
      result.divergent_record = row;
      result.divergent_tick = produced->snapshot.tick;
      return result;
    }
  }
  if (row < trace.rows.size()) {
    // The file holds records the regenerated run never emitted.
    result.identical = false;
    result.divergent_record = row + 1;
    result.divergent_tick = trace.rows[row].record.snapshot.tick;
  }
  return result;
}

ReplayResult replay(const std::filesystem::path& trace_path) {
  const TraceMeta meta = read_meta(meta_path(trace_path));
  return replay(meta, read_trace(trace_path));
}

}  // namespace gyrolab::trace
