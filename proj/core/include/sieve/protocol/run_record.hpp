#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sieve::protocol {

enum class RunStatus { Pending, Running, Completed, Aborted, Faulted };

std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view s);
inline bool is_terminal(RunStatus s) {
  return s == RunStatus::Completed || s == RunStatus::Aborted || s == RunStatus::Faulted;
}

// One step boundary or run lifecycle event. snapshot_ref names the machine
// snapshot taken at this event: "<run_id>/<seq>".
struct TelemetryEvent {
  std::string run_id;
  std::uint64_t seq{0};
  std::int64_t t_ms{0};
  int step{-1};  // -1 for run-level events
  std::string action;
  std::string phase;  // start | enter | exit | abort | safe_state | end
  std::string snapshot_ref;

  bool operator==(const TelemetryEvent&) const = default;
};

nlohmann::json to_json(const TelemetryEvent& e);
TelemetryEvent event_from_json(const nlohmann::json& j);

struct RunRecord {
  std::string id;
  std::string script;
  std::string protocol;    // cyst | egg | full
  std::string input_type;  // SoilSample | CystSample
  std::string profile;
  std::uint64_t seed{0};
  double speed{0.0};
  std::int64_t start_ms{0};
  std::int64_t end_ms{0};
  std::int64_t expected_total_ms{0};
  RunStatus status{RunStatus::Pending};
  std::string reason;  // Faulted or Aborted detail
  int steps_executed{0};
  std::map<std::string, std::uint64_t> output_counts;
  std::vector<TelemetryEvent> telemetry;

  std::int64_t duration_ms() const { return end_ms - start_ms; }
  bool operator==(const RunRecord&) const = default;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);
// Two-space indented JSON with sorted keys; byte-stable.
std::string format_record(const RunRecord& r);

// run_id,protocol,profile,seed,status,duration_ms,output,count with one row
// per output count (a single row with an empty output when there are none).
std::string run_report_csv(const RunRecord& r);

}  // namespace sieve::protocol
