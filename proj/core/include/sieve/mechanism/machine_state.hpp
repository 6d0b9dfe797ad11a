#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sieve/model/sieve.hpp"

namespace sieve::mech {

using model::SieveId;

enum class Compression { Uncompressed, Partial, Full };
enum class Level : int { Top = 0, Middle = 1, Bottom = 2 };
enum class Fingers { Open, Closed };

std::string_view to_string(Compression c);
std::string_view to_string(Level l);
std::optional<Compression> parse_compression(std::string_view s);
std::optional<Level> parse_level(std::string_view s);

inline constexpr int kLevels = 3;
inline constexpr int kPositions = 4;

// Fixed stations around the central post, as physical quarter positions.
namespace station {
inline constexpr int kWash = 0;     // gripper/washing system
inline constexpr int kTransfer = 1; // second gripper-reachable position
inline constexpr int kGrinder = 2;
inline constexpr int kDecant = 3;
}  // namespace station

inline constexpr double kTopHeightMm = 11.5 * model::kMmPerInch;
inline constexpr double kMiddleHeightMm = 7.0 * model::kMmPerInch;
inline constexpr double kBottomHeightMm = 2.5 * model::kMmPerInch;
// Pad heights are measured from the mesh of the sieve on the top level.
inline constexpr double kSieveRimMm = 2.0 * model::kMmPerInch;
inline constexpr double kPadHoverMm = 1.0 * model::kMmPerInch;
inline constexpr double kPadClearMm = 4.0 * model::kMmPerInch;

bool gripper_reachable(int position);

// Physical location of a slot: level plus station position (0..3).
struct SlotRef {
  Level level{Level::Top};
  int position{0};
  bool operator==(const SlotRef&) const = default;
};

std::string to_string(const SlotRef& s);

struct StageState {
  int rotation_index{0};
  Compression compression{Compression::Uncompressed};
  // Indexed by [level][stage slot]; slots are fixed to the stage and turn with it.
  std::array<std::array<std::optional<SieveId>, kPositions>, kLevels> slots{};

  int stage_slot(int position) const;
  const std::optional<SieveId>& at(SlotRef ref) const;
  std::optional<SieveId>& at(SlotRef ref);
  // Heights above the base, top to bottom; a pure function of compression.
  std::array<double, kLevels> level_heights_mm() const;
  // Sieves present at a station position, top to bottom.
  std::vector<SieveId> column(int position) const;
  std::optional<SlotRef> find(SieveId id) const;

  bool operator==(const StageState&) const = default;
};

std::array<double, kLevels> heights_for(Compression c);

struct GripperState {
  double wrist_deg{0.0};
  Fingers fingers{Fingers::Open};
  std::optional<SieveId> holding;
  std::optional<SlotRef> at;  // nullopt means parked

  bool parked() const { return !at.has_value() && !holding.has_value(); }
  bool operator==(const GripperState&) const = default;
};

struct GrinderState {
  double pad_height_mm{kPadClearMm};
  bool spinning{false};
  double rpm{0.0};  // commanded speed

  bool raised() const { return pad_height_mm >= kPadClearMm; }
  bool in_contact() const { return pad_height_mm == 0.0; }
  bool operator==(const GrinderState&) const = default;
};

struct SprayerState {
  std::optional<SieveId> engaged_over;
  bool bar_spinning{false};
  bool operator==(const SprayerState&) const = default;
};

struct ValveState {
  bool sprayer{false};
  bool nozzle{false};
  bool drill{false};
  bool operator==(const ValveState&) const = default;
};

inline constexpr double kGrindRpm = 500.0;

struct MachineState {
  StageState stage;
  GripperState gripper;
  GrinderState grinder;
  SprayerState sprayer;
  ValveState valves;

  // Powered devices off and every moving part clear: the state a run must
  // start from and the state abort drives towards.
  bool is_safe() const;
  bool operator==(const MachineState&) const = default;
};

// Sieve loading for the cyst protocol: #20 over #60 at the decant station and
// #200 over #500 in the neighbouring column.
MachineState cyst_layout();
// Sieve loading for the egg protocol: #60 above #200 and #500 at the transfer
// station, which is what the cyst protocol leaves behind.
MachineState egg_layout();

// Every sieve id held in slots or in the gripper, sorted.
std::vector<SieveId> sieve_inventory(const MachineState& s);

// Empty when every state invariant holds; otherwise one message per violation.
std::vector<std::string> check_invariants(const MachineState& s);

}  // namespace sieve::mech
