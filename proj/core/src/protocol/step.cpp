#include "sieve/protocol/step.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sieve/errors.hpp"

namespace sieve::protocol {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::int64_t seconds_to_ms(double s) { return std::llround(s * 1000.0); }

json slot_json(const mech::SlotRef& s) { return {{"level", mech::to_string(s.level)}, {"position", s.position}}; }

mech::SlotRef slot_from(const json& j) {
  const auto level = mech::parse_level(j.at("level").get<std::string>());
  if (!level) throw ConfigError("unknown level " + j.at("level").dump());
  return {*level, j.at("position").get<int>()};
}

double seconds(const json& p) {
  const double s = p.at("duration_s").get<double>();
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("duration_s must be a finite value >= 0");
  return s;
}

}  // namespace

std::string_view action_name(const Action& a) {
  return std::visit(overloaded{
                        [](const action::Decant&) { return "Decant"; },
                        [](const action::Wash&) { return "Wash"; },
                        [](const action::Rotate&) { return "Rotate"; },
                        [](const action::Compress&) { return "Compress"; },
                        [](const action::SprayerRetract&) { return "SprayerRetract"; },
                        [](const action::GripperTransfer&) { return "GripperTransfer"; },
                        [](const action::GrinderLower&) { return "GrinderLower"; },
                        [](const action::GrinderSpin&) { return "GrinderSpin"; },
                        [](const action::Grind&) { return "Grind"; },
                        [](const action::GrinderRaise&) { return "GrinderRaise"; },
                        [](const action::NozzleSpray&) { return "NozzleSpray"; },
                        [](const action::CollectOutput&) { return "CollectOutput"; },
                        [](const action::Dwell&) { return "Dwell"; },
                    },
                    a);
}

bool is_timed(const Action& a) {
  return std::holds_alternative<action::Wash>(a) || std::holds_alternative<action::Grind>(a) ||
         std::holds_alternative<action::NozzleSpray>(a) || std::holds_alternative<action::Dwell>(a);
}

std::int64_t nominal_ms(const Action& a) {
  return std::visit(overloaded{
                        [](const action::Wash& w) { return seconds_to_ms(w.duration_s); },
                        [](const action::Grind& g) { return seconds_to_ms(g.duration_s); },
                        [](const action::NozzleSpray& n) { return seconds_to_ms(n.duration_s); },
                        [](const action::Dwell& d) { return seconds_to_ms(d.duration_s); },
                        [](const auto&) { return std::int64_t{0}; },
                    },
                    a);
}

std::string_view to_string(ScriptName n) {
  switch (n) {
    case ScriptName::CystExtraction: return "CystExtraction";
    case ScriptName::EggExtraction: return "EggExtraction";
    case ScriptName::FullExtraction: return "FullExtraction";
    case ScriptName::Custom: return "Custom";
  }
  return "Custom";
}

ScriptName parse_script_name(std::string_view s) {
  for (auto n : {ScriptName::CystExtraction, ScriptName::EggExtraction, ScriptName::FullExtraction,
                 ScriptName::Custom}) {
    if (to_string(n) == s) return n;
  }
  throw ConfigError("unknown script name " + std::string(s));
}

std::int64_t ProtocolScript::sum_ms() const {
  return std::accumulate(steps.begin(), steps.end(), std::int64_t{0},
                         [](std::int64_t t, const ProtocolStep& s) { return t + s.duration_ms; });
}

ProtocolScript concat(ScriptName name, const ProtocolScript& a, const ProtocolScript& b) {
  ProtocolScript out;
  out.name = name;
  out.steps = a.steps;
  out.steps.insert(out.steps.end(), b.steps.begin(), b.steps.end());
  out.expected_total_ms = out.sum_ms();
  out.grind_cycles = a.grind_cycles + b.grind_cycles;
  return out;
}

json to_json(const ProtocolStep& s) {
  json params = std::visit(
      overloaded{
          [](const action::Wash& w) -> json { return {{"sieve", w.sieve.mesh}, {"duration_s", w.duration_s}}; },
          [](const action::Rotate& r) -> json { return {{"quarter_turns", r.quarter_turns}}; },
          [](const action::Compress& c) -> json { return {{"target", mech::to_string(c.target)}}; },
          [](const action::GripperTransfer& t) -> json { return {{"from", slot_json(t.from)}, {"to", slot_json(t.to)}}; },
          [](const action::GrinderLower& g) -> json { return {{"height_mm", g.height_mm}}; },
          [](const action::GrinderSpin& g) -> json { return {{"on", g.on}}; },
          [](const action::Grind& g) -> json { return {{"duration_s", g.duration_s}}; },
          [](const action::GrinderRaise& g) -> json { return {{"height_mm", g.height_mm}}; },
          [](const action::NozzleSpray& n) -> json { return {{"duration_s", n.duration_s}}; },
          [](const action::Dwell& d) -> json { return {{"duration_s", d.duration_s}, {"label", d.label}}; },
          [](const auto&) -> json { return json::object(); },
      },
      s.action);
  return {{"action", action_name(s.action)}, {"params", params}, {"duration_ms", s.duration_ms}};
}

ProtocolStep step_from_json(const json& j) {
  ProtocolStep s;
  try {
    const auto name = j.at("action").get<std::string>();
    const json p = j.value("params", json::object());
    if (name == "Decant") {
      s.action = action::Decant{};
    } else if (name == "Wash") {
      s.action = action::Wash{model::SieveId{p.at("sieve").get<int>()}, seconds(p)};
    } else if (name == "Rotate") {
      s.action = action::Rotate{p.at("quarter_turns").get<int>()};
    } else if (name == "Compress") {
      const auto c = mech::parse_compression(p.at("target").get<std::string>());
      if (!c) throw ConfigError("unknown compression target " + p.at("target").dump());
      s.action = action::Compress{*c};
    } else if (name == "SprayerRetract") {
      s.action = action::SprayerRetract{};
    } else if (name == "GripperTransfer") {
      s.action = action::GripperTransfer{slot_from(p.at("from")), slot_from(p.at("to"))};
    } else if (name == "GrinderLower") {
      s.action = action::GrinderLower{p.at("height_mm").get<double>()};
    } else if (name == "GrinderSpin") {
      s.action = action::GrinderSpin{p.at("on").get<bool>()};
    } else if (name == "Grind") {
      s.action = action::Grind{seconds(p)};
    } else if (name == "GrinderRaise") {
      s.action = action::GrinderRaise{p.at("height_mm").get<double>()};
    } else if (name == "NozzleSpray") {
      s.action = action::NozzleSpray{seconds(p)};
    } else if (name == "CollectOutput") {
      s.action = action::CollectOutput{};
    } else if (name == "Dwell") {
      s.action = action::Dwell{seconds(p), p.value("label", std::string{})};
    } else {
      throw ConfigError("unknown protocol action " + name);
    }
    s.duration_ms = j.contains("duration_ms") ? j.at("duration_ms").get<std::int64_t>() : nominal_ms(s.action);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("protocol step: ") + e.what());
  }
  if (s.duration_ms < 0) throw ConfigError("duration_ms must be >= 0");
  return s;
}

json to_json(const ProtocolScript& s) {
  json steps = json::array();
  for (const auto& st : s.steps) steps.push_back(to_json(st));
  return {{"name", to_string(s.name)},
          {"expected_total_ms", s.expected_total_ms},
          {"grind_cycles", s.grind_cycles},
          {"steps", steps}};
}

ProtocolScript script_from_json(const json& j) {
  ProtocolScript s;
  try {
    s.name = parse_script_name(j.value("name", std::string("Custom")));
    for (const auto& st : j.at("steps")) s.steps.push_back(step_from_json(st));
    s.grind_cycles = 0;
    for (const auto& st : s.steps) s.grind_cycles += std::holds_alternative<action::Grind>(st.action) ? 1 : 0;
    s.expected_total_ms = j.value("expected_total_ms", s.sum_ms());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("protocol script: ") + e.what());
  }
  if (s.expected_total_ms != s.sum_ms()) {
    throw ConfigError("expected_total_ms " + std::to_string(s.expected_total_ms) + " disagrees with step sum " +
                      std::to_string(s.sum_ms()));
  }
  return s;
}

ProtocolScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open script " + path);
  try {
    return script_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("script " + path + ": " + e.what());
  }
}

std::string describe(const ProtocolStep& s) {
  std::ostringstream os;
  os << action_name(s.action);
  const auto p = to_json(s).at("params");
  if (!p.empty()) os << ' ' << p.dump();
  os << " (" << s.duration_ms << " ms)";
  return os.str();
}

}  // namespace sieve::protocol
