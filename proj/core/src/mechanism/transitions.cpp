#include "sieve/mechanism/transitions.hpp"

#include <cmath>
#include <sstream>

#include "sieve/errors.hpp"

namespace sieve::mech {

namespace {

void require(bool ok, const std::string& reason) {
  if (!ok) throw InterlockViolation(reason);
}

void require_position(int p) {
  if (p < 0 || p >= kPositions) throw DomainError("station position must be 0..3");
}

}  // namespace

MachineState rotate_stage(const MachineState& s, int quarter_turns) {
  require(s.stage.compression == Compression::Uncompressed, "rotation while compressed");
  require(s.grinder.raised(), "rotation with the grinding pad lowered");
  require(s.gripper.parked(), "rotation with the gripper engaged");
  require(!s.sprayer.engaged_over, "rotation with the sprayer covering a sieve");
  MachineState out = s;
  out.stage.rotation_index = ((s.stage.rotation_index + quarter_turns) % kPositions + kPositions) % kPositions;
  return out;
}

MachineState set_compression(const MachineState& s, Compression target) {
  if (s.stage.compression == target) return s;
  require(s.grinder.raised(), "compression change with the grinding pad lowered");
  require(s.gripper.parked(), "compression change with the gripper inside the stage");
  MachineState out = s;
  out.stage.compression = target;
  return out;
}

MachineState gripper_transfer(const MachineState& s, SlotRef from, SlotRef to) {
  require_position(from.position);
  require_position(to.position);
  require(s.stage.compression == Compression::Uncompressed, "gripper transfer on a compressed stage");
  require(s.gripper.parked(), "gripper transfer while the gripper is busy");
  require(s.grinder.raised(), "gripper transfer under a lowered pad");
  require(!s.sprayer.engaged_over, "gripper transfer blocked by the sprayer");
  require(gripper_reachable(from.position), "source " + to_string(from) + " outside gripper reach");
  require(gripper_reachable(to.position), "destination " + to_string(to) + " outside gripper reach");
  const auto& src = s.stage.at(from);
  if (!src) throw SlotEmpty("no sieve at " + to_string(from));
  if (s.stage.at(to)) throw SlotOccupied("slot " + to_string(to) + " already holds " + model::to_string(*s.stage.at(to)));
  MachineState out = s;
  // grab, lift, carry, set down, release, park
  out.stage.at(to) = *src;
  out.stage.at(from).reset();
  out.gripper.fingers = Fingers::Open;
  out.gripper.holding.reset();
  out.gripper.at.reset();
  return out;
}

MachineState gripper_wrist(const MachineState& s, double wrist_deg) {
  if (!(wrist_deg >= 0.0 && wrist_deg <= 180.0)) throw DomainError("wrist angle must be within 0..180 deg");
  require(s.gripper.parked() || s.gripper.holding.has_value(), "wrist rotation while engaged with a slot");
  MachineState out = s;
  out.gripper.wrist_deg = wrist_deg;
  return out;
}

MachineState grinder_set(const MachineState& s, double pad_height_mm, bool spinning) {
  if (!std::isfinite(pad_height_mm)) throw DomainError("pad height must be finite");
  require(pad_height_mm >= 0.0, "pad cannot go below the mesh");
  if (pad_height_mm < kSieveRimMm) {
    require(s.stage.compression == Compression::Full, "pad cannot reach unstacked sieve");
    require(s.stage.at({Level::Top, station::kGrinder}) == model::kMesh60,
            "pad lowered into a column without #60 on top");
  }
  MachineState out = s;
  out.grinder.pad_height_mm = pad_height_mm;
  out.grinder.spinning = spinning;
  out.grinder.rpm = spinning ? kGrindRpm : 0.0;
  out.valves.drill = spinning;
  return out;
}

MachineState sprayer_engage(const MachineState& s) {
  const auto& top = s.stage.at({Level::Top, station::kWash});
  require(top.has_value(), "sprayer engaged over an empty slot");
  require(s.gripper.parked(), "sprayer engaged while the gripper is busy");
  MachineState out = s;
  out.sprayer.engaged_over = *top;
  return out;
}

MachineState sprayer_retract(const MachineState& s) {
  require(!s.valves.sprayer, "sprayer retracted with its valve open");
  MachineState out = s;
  out.sprayer.engaged_over.reset();
  out.sprayer.bar_spinning = false;
  return out;
}

MachineState set_sprayer_valve(const MachineState& s, bool open) {
  if (open) require(s.sprayer.engaged_over.has_value(), "sprayer valve opened while retracted");
  MachineState out = s;
  out.valves.sprayer = open;
  out.sprayer.bar_spinning = open;
  return out;
}

MachineState set_nozzle_valve(const MachineState& s, bool open) {
  MachineState out = s;
  out.valves.nozzle = open;
  return out;
}

MachineState apply(const MachineState& s, const Command& c) {
  return std::visit(
      [&](const auto& x) -> MachineState {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, cmd::Rotate>) return rotate_stage(s, x.quarter_turns);
        else if constexpr (std::is_same_v<T, cmd::Compress>) return set_compression(s, x.target);
        else if constexpr (std::is_same_v<T, cmd::Transfer>) return gripper_transfer(s, x.from, x.to);
        else if constexpr (std::is_same_v<T, cmd::Wrist>) return gripper_wrist(s, x.deg);
        else if constexpr (std::is_same_v<T, cmd::Grinder>) return grinder_set(s, x.pad_height_mm, x.spinning);
        else if constexpr (std::is_same_v<T, cmd::SprayerEngage>) return sprayer_engage(s);
        else if constexpr (std::is_same_v<T, cmd::SprayerRetract>) return sprayer_retract(s);
        else if constexpr (std::is_same_v<T, cmd::SprayerValve>) return set_sprayer_valve(s, x.open);
        else return set_nozzle_valve(s, x.open);
      },
      c);
}

std::string describe(const Command& c) {
  std::ostringstream os;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, cmd::Rotate>) os << "rotate " << x.quarter_turns;
        else if constexpr (std::is_same_v<T, cmd::Compress>) os << "compress " << to_string(x.target);
        else if constexpr (std::is_same_v<T, cmd::Transfer>) os << "transfer " << to_string(x.from) << "->" << to_string(x.to);
        else if constexpr (std::is_same_v<T, cmd::Wrist>) os << "wrist " << x.deg;
        else if constexpr (std::is_same_v<T, cmd::Grinder>) os << "grinder " << x.pad_height_mm << (x.spinning ? " spin" : " still");
        else if constexpr (std::is_same_v<T, cmd::SprayerEngage>) os << "sprayer engage";
        else if constexpr (std::is_same_v<T, cmd::SprayerRetract>) os << "sprayer retract";
        else if constexpr (std::is_same_v<T, cmd::SprayerValve>) os << "sprayer valve " << (x.open ? "open" : "close");
        else os << "nozzle valve " << (x.open ? "open" : "close");
      },
      c);
  return os.str();
}

}  // namespace sieve::mech
