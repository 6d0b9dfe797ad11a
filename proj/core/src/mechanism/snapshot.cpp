#include "sieve/mechanism/snapshot.hpp"

#include <nlohmann/json.hpp>

#include "sieve/errors.hpp"

namespace sieve::mech {

using nlohmann::json;

namespace {

json sieve_or_null(const std::optional<SieveId>& s) { return s ? json(s->mesh) : json(nullptr); }

std::optional<SieveId> sieve_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return SieveId{j.get<int>()};
}

}  // namespace

json to_json(const MachineState& s) {
  json slots = json::array();
  for (int l = 0; l < kLevels; ++l) {
    json level = json::array();
    for (int p = 0; p < kPositions; ++p) level.push_back(sieve_or_null(s.stage.at({static_cast<Level>(l), p})));
    slots.push_back(level);
  }
  const auto h = s.stage.level_heights_mm();
  json gripper_at = s.gripper.at ? json{{"level", to_string(s.gripper.at->level)}, {"position", s.gripper.at->position}}
                                 : json(nullptr);
  return {
      {"stage",
       {{"rotation_index", s.stage.rotation_index},
        {"compression", to_string(s.stage.compression)},
        {"level_heights_mm", {h[0], h[1], h[2]}},
        // slots[level][station position], levels top to bottom
        {"slots", slots}}},
      {"gripper",
       {{"wrist_deg", s.gripper.wrist_deg},
        {"fingers", s.gripper.fingers == Fingers::Closed ? "Closed" : "Open"},
        {"holding", sieve_or_null(s.gripper.holding)},
        {"position", gripper_at.is_null() ? json("parked") : gripper_at}}},
      {"grinder",
       {{"pad_height_mm", s.grinder.pad_height_mm},
        {"spinning", s.grinder.spinning},
        {"rpm", s.grinder.rpm},
        {"raised", s.grinder.raised()},
        {"contact", s.grinder.in_contact()}}},
      {"sprayer", {{"engaged_over", sieve_or_null(s.sprayer.engaged_over)}, {"bar_spinning", s.sprayer.bar_spinning}}},
      {"valves", {{"sprayer", s.valves.sprayer}, {"nozzle", s.valves.nozzle}, {"drill", s.valves.drill}}},
  };
}

MachineState machine_state_from_json(const json& j) {
  MachineState s;
  try {
    const auto& st = j.at("stage");
    s.stage.rotation_index = st.at("rotation_index").get<int>();
    if (s.stage.rotation_index < 0 || s.stage.rotation_index >= kPositions) {
      throw ConfigError("rotation_index out of range");
    }
    auto comp = parse_compression(st.at("compression").get<std::string>());
    if (!comp) throw ConfigError("unknown compression state");
    s.stage.compression = *comp;
    const auto& slots = st.at("slots");
    for (int l = 0; l < kLevels; ++l) {
      for (int p = 0; p < kPositions; ++p) s.stage.at({static_cast<Level>(l), p}) = sieve_from(slots.at(l).at(p));
    }
    const auto& g = j.at("gripper");
    s.gripper.wrist_deg = g.at("wrist_deg").get<double>();
    s.gripper.fingers = g.at("fingers").get<std::string>() == "Closed" ? Fingers::Closed : Fingers::Open;
    s.gripper.holding = sieve_from(g.at("holding"));
    if (g.at("position").is_object()) {
      auto lvl = parse_level(g.at("position").at("level").get<std::string>());
      if (!lvl) throw ConfigError("unknown gripper level");
      s.gripper.at = SlotRef{*lvl, g.at("position").at("position").get<int>()};
    }
    const auto& gr = j.at("grinder");
    s.grinder.pad_height_mm = gr.at("pad_height_mm").get<double>();
    s.grinder.spinning = gr.at("spinning").get<bool>();
    s.grinder.rpm = gr.at("rpm").get<double>();
    s.sprayer.engaged_over = sieve_from(j.at("sprayer").at("engaged_over"));
    s.sprayer.bar_spinning = j.at("sprayer").at("bar_spinning").get<bool>();
    const auto& v = j.at("valves");
    s.valves = {v.at("sprayer").get<bool>(), v.at("nozzle").get<bool>(), v.at("drill").get<bool>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("machine snapshot: ") + e.what());
  }
  return s;
}

}  // namespace sieve::mech
