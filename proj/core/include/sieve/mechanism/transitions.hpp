#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include "sieve/mechanism/machine_state.hpp"

namespace sieve::mech {

class MechanismError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A command the physical geometry would forbid. Raised only by protocol bugs;
// the executor never retries it.
class InterlockViolation : public MechanismError {
 public:
  using MechanismError::MechanismError;
};

class SlotEmpty : public MechanismError {
 public:
  using MechanismError::MechanismError;
};

class SlotOccupied : public MechanismError {
 public:
  using MechanismError::MechanismError;
};

// Transitions are pure: they return the successor state or throw, and a
// rejected command never changes the caller's state.
MachineState rotate_stage(const MachineState& s, int quarter_turns);
MachineState set_compression(const MachineState& s, Compression target);
MachineState gripper_transfer(const MachineState& s, SlotRef from, SlotRef to);
MachineState gripper_wrist(const MachineState& s, double wrist_deg);
MachineState grinder_set(const MachineState& s, double pad_height_mm, bool spinning);
MachineState sprayer_engage(const MachineState& s);
MachineState sprayer_retract(const MachineState& s);
MachineState set_sprayer_valve(const MachineState& s, bool open);
MachineState set_nozzle_valve(const MachineState& s, bool open);

namespace cmd {
struct Rotate { int quarter_turns{0}; };
struct Compress { Compression target{Compression::Uncompressed}; };
struct Transfer { SlotRef from; SlotRef to; };
struct Wrist { double deg{0.0}; };
struct Grinder { double pad_height_mm{kPadClearMm}; bool spinning{false}; };
struct SprayerEngage {};
struct SprayerRetract {};
struct SprayerValve { bool open{false}; };
struct NozzleValve { bool open{false}; };
}  // namespace cmd

using Command = std::variant<cmd::Rotate, cmd::Compress, cmd::Transfer, cmd::Wrist, cmd::Grinder,
                             cmd::SprayerEngage, cmd::SprayerRetract, cmd::SprayerValve, cmd::NozzleValve>;

MachineState apply(const MachineState& s, const Command& c);
std::string describe(const Command& c);

}  // namespace sieve::mech
