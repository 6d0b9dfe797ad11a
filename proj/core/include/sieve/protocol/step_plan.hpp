#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "sieve/hal/device_bus.hpp"
#include "sieve/mechanism/transitions.hpp"
#include "sieve/protocol/step.hpp"

namespace sieve::protocol {

// Process-model effects, applied by the executor at the point they occur.
enum class SimHook { Decant, Wash, Transfer, Grind, Spray, Collect };

namespace op {
struct Mech {
  mech::Command command;
};
struct Motor {
  hal::Stepper stepper;
  std::int64_t steps;
};
struct Relay {
  int index;
  bool on;
};
struct Servo {
  int angle_deg;
};
// The timed body of a step; abortable at every tick.
struct Hold {
  std::int64_t ms;
};
struct Sim {
  SimHook hook;
  model::SieveId sieve{};  // subject sieve where the hook needs one
  model::SieveId below{};
  double duration_s{0.0};
};
}  // namespace op

using Op = std::variant<op::Mech, op::Motor, op::Relay, op::Servo, op::Hold, op::Sim>;

struct StepPlan {
  std::vector<Op> ops;
  std::int64_t motion_ms{0};  // stepper time at the configured step period
  std::int64_t hold_ms{0};

  std::int64_t busy_ms() const { return motion_ms + hold_ms; }
};

inline constexpr int kServoSprayerRetracted = 0;
inline constexpr int kServoSprayerEngaged = 90;
// Stage lift lead and grinder quill lead.
inline constexpr double kLiftStepsPerMm = 10.0;
inline constexpr double kQuillStepsPerMm = 20.0;

// Expands one step against the state it will run from. Throws
// mech::InterlockViolation when a step-level precondition fails; mechanism
// preconditions surface when the plan's Mech ops are applied in order.
StepPlan plan_step(const ProtocolStep& step, const mech::MachineState& s, const hal::HalConfig& hal);

// Applies only the Mech ops, in order.
mech::MachineState apply_mechanics(const StepPlan& plan, const mech::MachineState& s);

}  // namespace sieve::protocol
