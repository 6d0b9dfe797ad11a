#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sieve/hal/trace.hpp"
#include "sieve/hal/virtual_clock.hpp"

namespace sieve::hal {

enum class Stepper : int {
  StageRotation = 0,
  StageLift,
  GripperSwing,
  GripperWrist,
  GrinderQuill,
  SprayerArm,
};
inline constexpr int kStepperCount = 6;
inline constexpr int kRelayCount = 8;

std::string_view to_string(Stepper s);

// Relay assignment on the 8-channel board.
namespace relay {
inline constexpr int kSprayerValve = 0;
inline constexpr int kNozzleValve = 1;
inline constexpr int kDrillPress = 2;
}  // namespace relay

struct HalConfig {
  Millis step_period{1};
  int steps_per_rev{200};
  double stage_gear_ratio{2.0};
  double valve_flow_lpm{4.0};
  double min_flow_lpm{0.3};
  double max_flow_lpm{10.0};
  double drill_setpoint_rpm{500.0};
  Millis drill_ramp{1000};
  // Hall sensor: F = 7.5 Hz per L/min, i.e. 450 pulses per liter.
  double pulses_per_liter{450.0};

  bool operator==(const HalConfig&) const = default;
};

// Throws ConfigError when the valve flow falls outside the sensor range or a
// period/ratio is non-positive.
void validate(const HalConfig& cfg);
HalConfig hal_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HalConfig& cfg);

struct StepperChannel {
  std::int64_t position_steps{0};
  int steps_per_rev{200};
  double gear_ratio{1.0};

  double output_angle_deg() const;
  bool operator==(const StepperChannel&) const = default;
};

struct ServoChannel {
  int angle_deg{0};
  bool operator==(const ServoChannel&) const = default;
};

struct RelayChannel {
  bool on{false};
  bool operator==(const RelayChannel&) const = default;
};

struct FlowReading {
  double rate_lpm{0.0};
  std::uint64_t pulse_count{0};
  double volume_l{0.0};
};

// Complete simulated device state; equality is bitwise over integers, which
// makes additivity and determinism checks exact.
struct DeviceState {
  VirtualClock clock;
  std::array<StepperChannel, kStepperCount> steppers{};
  ServoChannel servo;
  std::array<RelayChannel, kRelayCount> relays{};
  // Time the drill relay has been on, saturating at the ramp length.
  Millis drill_on_for{0};
  // Accumulated open time, indexed by the number of simultaneously open valves.
  std::array<Millis, 3> flow_time{};

  bool operator==(const DeviceState&) const = default;
};

// Hardware abstraction for the workstation electronics. Only the simulated
// implementation ships.
class DeviceBus {
 public:
  virtual ~DeviceBus() = default;

  // Returns the new position. Throws DeviceError for an unknown channel.
  virtual std::int64_t step(int channel, std::int64_t steps) = 0;
  // Returns the acknowledged state. Throws DeviceError for an index outside 0..7.
  virtual bool set_relay(int index, bool on) = 0;
  virtual int set_servo(int angle_deg) = 0;

  virtual FlowReading read_flow() const = 0;
  virtual double drill_rpm() const = 0;

  virtual Millis now() const = 0;
  // Throws DomainError for negative intervals.
  virtual Millis advance(Millis dt) = 0;

  std::int64_t step(Stepper s, std::int64_t steps) { return step(static_cast<int>(s), steps); }
};

class SimulatedBus final : public DeviceBus {
 public:
  explicit SimulatedBus(HalConfig cfg = {}, TraceLog* trace = nullptr);

  using DeviceBus::step;
  std::int64_t step(int channel, std::int64_t steps) override;
  bool set_relay(int index, bool on) override;
  int set_servo(int angle_deg) override;

  FlowReading read_flow() const override;
  double drill_rpm() const override;

  Millis now() const override { return state_.clock.now(); }
  VirtualClock& clock() { return state_.clock; }
  Millis advance(Millis dt) override;

  const DeviceState& state() const { return state_; }
  const HalConfig& config() const { return cfg_; }
  const StepperChannel& stepper(Stepper s) const { return state_.steppers[static_cast<int>(s)]; }
  bool relay(int index) const;
  double water_volume_l() const { return read_flow().volume_l; }

  void attach_trace(TraceLog* trace) { trace_ = trace; }

 private:
  int open_valves() const;
  double flow_rate(int open) const;
  void emit(std::string_view device, std::string_view command, std::string value);

  HalConfig cfg_;
  DeviceState state_;
  TraceLog* trace_;
};

}  // namespace sieve::hal
