#include "sieve/protocol/run_record.hpp"

#include <sstream>

#include "sieve/errors.hpp"

namespace sieve::protocol {

using nlohmann::json;

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Pending: return "Pending";
    case RunStatus::Running: return "Running";
    case RunStatus::Completed: return "Completed";
    case RunStatus::Aborted: return "Aborted";
    case RunStatus::Faulted: return "Faulted";
  }
  return "Pending";
}

RunStatus parse_run_status(std::string_view s) {
  for (auto v : {RunStatus::Pending, RunStatus::Running, RunStatus::Completed, RunStatus::Aborted,
                 RunStatus::Faulted}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown run status " + std::string(s));
}

json to_json(const TelemetryEvent& e) {
  return {{"run_id", e.run_id}, {"seq", e.seq},     {"t_ms", e.t_ms},
          {"step", e.step},     {"action", e.action}, {"phase", e.phase},
          {"machine_snapshot_ref", e.snapshot_ref}};
}

TelemetryEvent event_from_json(const json& j) {
  TelemetryEvent e;
  e.run_id = j.at("run_id").get<std::string>();
  e.seq = j.at("seq").get<std::uint64_t>();
  e.t_ms = j.at("t_ms").get<std::int64_t>();
  e.step = j.at("step").get<int>();
  e.action = j.at("action").get<std::string>();
  e.phase = j.at("phase").get<std::string>();
  e.snapshot_ref = j.value("machine_snapshot_ref", std::string{});
  return e;
}

json to_json(const RunRecord& r) {
  json telemetry = json::array();
  for (const auto& e : r.telemetry) telemetry.push_back(to_json(e));
  json counts = json::object();
  for (const auto& [k, v] : r.output_counts) counts[k] = v;
  return {{"id", r.id},
          {"script", r.script},
          {"protocol", r.protocol},
          {"input_type", r.input_type},
          {"profile", r.profile},
          {"seed", r.seed},
          {"speed", r.speed},
          {"start_ms", r.start_ms},
          {"end_ms", r.end_ms},
          {"expected_total_ms", r.expected_total_ms},
          {"status", to_string(r.status)},
          {"reason", r.reason},
          {"steps_executed", r.steps_executed},
          {"output_counts", counts},
          {"telemetry", telemetry}};
}

RunRecord run_record_from_json(const json& j) {
  RunRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.script = j.value("script", std::string{});
    r.protocol = j.value("protocol", std::string{});
    r.input_type = j.value("input_type", std::string{});
    r.profile = j.value("profile", std::string{});
    r.seed = j.value("seed", std::uint64_t{0});
    r.speed = j.value("speed", 0.0);
    r.start_ms = j.value("start_ms", std::int64_t{0});
    r.end_ms = j.value("end_ms", std::int64_t{0});
    r.expected_total_ms = j.value("expected_total_ms", std::int64_t{0});
    r.status = parse_run_status(j.at("status").get<std::string>());
    r.reason = j.value("reason", std::string{});
    r.steps_executed = j.value("steps_executed", 0);
    if (j.contains("output_counts")) {
      for (const auto& [k, v] : j.at("output_counts").items()) r.output_counts[k] = v.get<std::uint64_t>();
    }
    if (j.contains("telemetry")) {
      for (const auto& e : j.at("telemetry")) r.telemetry.push_back(event_from_json(e));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run record: ") + e.what());
  }
  return r;
}

std::string format_record(const RunRecord& r) { return to_json(r).dump(2); }

std::string run_report_csv(const RunRecord& r) {
  std::ostringstream out;
  out << "run_id,protocol,profile,seed,status,duration_ms,output,count\n";
  const auto prefix = [&] {
    out << r.id << ',' << r.protocol << ',' << r.profile << ',' << r.seed << ',' << to_string(r.status) << ','
        << r.duration_ms() << ',';
  };
  if (r.output_counts.empty()) {
    prefix();
    out << ",\n";
  }
  for (const auto& [k, v] : r.output_counts) {
    prefix();
    out << k << ',' << v << '\n';
  }
  return out.str();
}

}  // namespace sieve::protocol
