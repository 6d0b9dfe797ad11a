#include "sieve/mechanism/machine_state.hpp"

#include <algorithm>

namespace sieve::mech {

std::string_view to_string(Compression c) {
  switch (c) {
    case Compression::Uncompressed: return "Uncompressed";
    case Compression::Partial: return "Partial";
    case Compression::Full: return "Full";
  }
  return "?";
}

std::string_view to_string(Level l) {
  switch (l) {
    case Level::Top: return "top";
    case Level::Middle: return "middle";
    case Level::Bottom: return "bottom";
  }
  return "?";
}

std::optional<Compression> parse_compression(std::string_view s) {
  for (auto c : {Compression::Uncompressed, Compression::Partial, Compression::Full}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<Level> parse_level(std::string_view s) {
  for (auto l : {Level::Top, Level::Middle, Level::Bottom}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

bool gripper_reachable(int position) {
  return position == station::kWash || position == station::kTransfer;
}

std::string to_string(const SlotRef& s) {
  return std::string(to_string(s.level)) + "/" + std::to_string(s.position);
}

int StageState::stage_slot(int position) const {
  return ((position - rotation_index) % kPositions + kPositions) % kPositions;
}

const std::optional<SieveId>& StageState::at(SlotRef ref) const {
  return slots[static_cast<int>(ref.level)][stage_slot(ref.position)];
}

std::optional<SieveId>& StageState::at(SlotRef ref) {
  return slots[static_cast<int>(ref.level)][stage_slot(ref.position)];
}

std::array<double, kLevels> heights_for(Compression c) {
  switch (c) {
    case Compression::Uncompressed: return {kTopHeightMm, kMiddleHeightMm, kBottomHeightMm};
    case Compression::Partial: return {kTopHeightMm, kMiddleHeightMm, kMiddleHeightMm};
    case Compression::Full: return {kTopHeightMm, kTopHeightMm, kTopHeightMm};
  }
  return {};
}

std::array<double, kLevels> StageState::level_heights_mm() const { return heights_for(compression); }

std::vector<SieveId> StageState::column(int position) const {
  std::vector<SieveId> out;
  for (auto l : {Level::Top, Level::Middle, Level::Bottom}) {
    if (const auto& s = at({l, position})) out.push_back(*s);
  }
  return out;
}

std::optional<SlotRef> StageState::find(SieveId id) const {
  for (int p = 0; p < kPositions; ++p) {
    for (auto l : {Level::Top, Level::Middle, Level::Bottom}) {
      if (at({l, p}) == id) return SlotRef{l, p};
    }
  }
  return std::nullopt;
}

bool MachineState::is_safe() const {
  return !valves.sprayer && !valves.nozzle && !valves.drill && !grinder.spinning &&
         grinder.rpm == 0.0 && grinder.raised() && gripper.parked() && !sprayer.engaged_over &&
         !sprayer.bar_spinning && stage.compression == Compression::Uncompressed;
}

namespace {

void place(MachineState& m, Level level, int stage_slot, SieveId id) {
  m.stage.slots[static_cast<int>(level)][stage_slot] = id;
}

}  // namespace

MachineState cyst_layout() {
  MachineState m;
  // Stage slot 0 starts at the decant station; one quarter turn brings it to the washer.
  m.stage.rotation_index = station::kDecant;
  place(m, Level::Top, 0, model::kMesh20);
  place(m, Level::Middle, 0, model::kMesh60);
  place(m, Level::Middle, 1, model::kMesh200);
  place(m, Level::Bottom, 1, model::kMesh500);
  return m;
}

MachineState egg_layout() {
  MachineState m;
  m.stage.rotation_index = 0;
  place(m, Level::Top, 0, model::kMesh20);
  place(m, Level::Top, 1, model::kMesh60);
  place(m, Level::Middle, 1, model::kMesh200);
  place(m, Level::Bottom, 1, model::kMesh500);
  return m;
}

std::vector<SieveId> sieve_inventory(const MachineState& s) {
  std::vector<SieveId> out;
  for (const auto& level : s.stage.slots) {
    for (const auto& slot : level) {
      if (slot) out.push_back(*slot);
    }
  }
  if (s.gripper.holding) out.push_back(*s.gripper.holding);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> check_invariants(const MachineState& s) {
  std::vector<std::string> v;
  const auto& st = s.stage;
  if (st.rotation_index < 0 || st.rotation_index >= kPositions) v.push_back("rotation index out of range");
  if (s.gripper.holding && s.gripper.fingers != Fingers::Closed) v.push_back("holding a sieve with open fingers");
  if (s.gripper.wrist_deg < 0.0 || s.gripper.wrist_deg > 180.0) v.push_back("wrist outside 0..180 deg");
  if (s.grinder.pad_height_mm < 0.0) v.push_back("pad below the mesh");
  if (s.grinder.rpm > 0.0 && !s.valves.drill) v.push_back("pad turning with the drill relay off");
  if (s.grinder.spinning != s.valves.drill) v.push_back("spin flag disagrees with drill relay");
  if (s.grinder.pad_height_mm < kSieveRimMm) {
    if (st.compression != Compression::Full) v.push_back("pad inside an unstacked column");
    if (st.at({Level::Top, station::kGrinder}) != model::kMesh60) v.push_back("pad inside a column without #60 on top");
  }
  if (s.sprayer.bar_spinning && !s.valves.sprayer) v.push_back("spray bar turning with valve closed");
  if (s.valves.sprayer && !s.sprayer.engaged_over) v.push_back("sprayer valve open while retracted");
  if (s.sprayer.engaged_over && st.at({Level::Top, station::kWash}) != s.sprayer.engaged_over) {
    v.push_back("sprayer engaged over a sieve that is not under it");
  }
  if (st.compression != Compression::Uncompressed && !s.gripper.parked()) {
    v.push_back("gripper inside a compressed stage");
  }
  auto inv = sieve_inventory(s);
  if (std::adjacent_find(inv.begin(), inv.end()) != inv.end()) v.push_back("duplicate sieve id");
  return v;
}

}  // namespace sieve::mech
