#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "sieve/errors.hpp"
#include "sieve/hal/device_bus.hpp"

namespace sieve::hal {

std::string_view to_string(Stepper s) {
  switch (s) {
    case Stepper::StageRotation: return "stage_rotation";
    case Stepper::StageLift: return "stage_lift";
    case Stepper::GripperSwing: return "gripper_swing";
    case Stepper::GripperWrist: return "gripper_wrist";
    case Stepper::GrinderQuill: return "grinder_quill";
    case Stepper::SprayerArm: return "sprayer_arm";
  }
  return "stepper?";
}

void validate(const HalConfig& c) {
  if (c.step_period.count() < 0) throw ConfigError("hal.step_period_ms must be >= 0");
  if (c.steps_per_rev <= 0) throw ConfigError("hal.steps_per_rev must be positive");
  if (!(c.stage_gear_ratio > 0.0)) throw ConfigError("hal.stage_gear_ratio must be positive");
  if (!(c.min_flow_lpm > 0.0) || !(c.max_flow_lpm >= c.min_flow_lpm)) {
    throw ConfigError("hal flow sensor range is invalid");
  }
  if (c.valve_flow_lpm < c.min_flow_lpm || c.valve_flow_lpm > c.max_flow_lpm) {
    throw ConfigError("hal.valve_flow_lpm must lie inside the flow sensor range");
  }
  if (!(c.drill_setpoint_rpm > 0.0)) throw ConfigError("hal.drill_setpoint_rpm must be positive");
  if (c.drill_ramp.count() < 0) throw ConfigError("hal.drill_ramp_ms must be >= 0");
  if (!(c.pulses_per_liter > 0.0)) throw ConfigError("hal.pulses_per_liter must be positive");
}

HalConfig hal_config_from_json(const nlohmann::json& j) {
  HalConfig c;
  try {
    c.step_period = Millis{j.value("step_period_ms", c.step_period.count())};
    c.steps_per_rev = j.value("steps_per_rev", c.steps_per_rev);
    c.stage_gear_ratio = j.value("stage_gear_ratio", c.stage_gear_ratio);
    c.valve_flow_lpm = j.value("valve_flow_lpm", c.valve_flow_lpm);
    c.drill_setpoint_rpm = j.value("drill_setpoint_rpm", c.drill_setpoint_rpm);
    c.drill_ramp = Millis{j.value("drill_ramp_ms", c.drill_ramp.count())};
    c.pulses_per_liter = j.value("pulses_per_liter", c.pulses_per_liter);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hal config: ") + e.what());
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const HalConfig& c) {
  return {{"step_period_ms", c.step_period.count()}, {"steps_per_rev", c.steps_per_rev},
          {"stage_gear_ratio", c.stage_gear_ratio},   {"valve_flow_lpm", c.valve_flow_lpm},
          {"drill_setpoint_rpm", c.drill_setpoint_rpm}, {"drill_ramp_ms", c.drill_ramp.count()},
          {"pulses_per_liter", c.pulses_per_liter}};
}

double StepperChannel::output_angle_deg() const {
  return static_cast<double>(position_steps) * (360.0 / steps_per_rev) / gear_ratio;
}

SimulatedBus::SimulatedBus(HalConfig cfg, TraceLog* trace) : cfg_(cfg), trace_(trace) {
  validate(cfg_);
  for (auto& s : state_.steppers) s.steps_per_rev = cfg_.steps_per_rev;
  state_.steppers[static_cast<int>(Stepper::StageRotation)].gear_ratio = cfg_.stage_gear_ratio;
}

void SimulatedBus::emit(std::string_view device, std::string_view command, std::string value) {
  if (trace_) trace_->record(state_.clock.now(), std::string(device), std::string(command), std::move(value));
}

std::int64_t SimulatedBus::step(int channel, std::int64_t steps) {
  if (channel < 0 || channel >= kStepperCount) {
    throw DeviceError("unknown stepper channel " + std::to_string(channel));
  }
  auto& ch = state_.steppers[channel];
  emit(to_string(static_cast<Stepper>(channel)), "step", std::to_string(steps));
  ch.position_steps += steps;
  advance(cfg_.step_period * std::llabs(steps));
  return ch.position_steps;
}

bool SimulatedBus::set_relay(int index, bool on) {
  if (index < 0 || index >= kRelayCount) {
    throw DeviceError("relay index " + std::to_string(index) + " out of range 0..7");
  }
  auto& r = state_.relays[index];
  emit("relay" + std::to_string(index), "set", on ? "on" : "off");
  if (index == relay::kDrillPress && on && !r.on) state_.drill_on_for = Millis{0};
  if (index == relay::kDrillPress && !on) state_.drill_on_for = Millis{0};
  r.on = on;
  return r.on;
}

int SimulatedBus::set_servo(int angle_deg) {
  state_.servo.angle_deg = std::clamp(angle_deg, 0, 180);
  emit("servo", "set", std::to_string(state_.servo.angle_deg));
  return state_.servo.angle_deg;
}

bool SimulatedBus::relay(int index) const {
  if (index < 0 || index >= kRelayCount) throw DeviceError("relay index out of range");
  return state_.relays[index].on;
}

int SimulatedBus::open_valves() const {
  return static_cast<int>(state_.relays[relay::kSprayerValve].on) +
         static_cast<int>(state_.relays[relay::kNozzleValve].on);
}

double SimulatedBus::flow_rate(int open) const {
  if (open == 0) return 0.0;
  return std::clamp(cfg_.valve_flow_lpm * open, cfg_.min_flow_lpm, cfg_.max_flow_lpm);
}

FlowReading SimulatedBus::read_flow() const {
  FlowReading r;
  r.rate_lpm = flow_rate(open_valves());
  for (int n = 1; n < static_cast<int>(state_.flow_time.size()); ++n) {
    r.volume_l += flow_rate(n) * static_cast<double>(state_.flow_time[n].count()) / 60000.0;
  }
  r.pulse_count = static_cast<std::uint64_t>(std::floor(r.volume_l * cfg_.pulses_per_liter));
  return r;
}

double SimulatedBus::drill_rpm() const {
  if (!state_.relays[relay::kDrillPress].on) return 0.0;
  if (cfg_.drill_ramp.count() == 0) return cfg_.drill_setpoint_rpm;
  const double frac = static_cast<double>(state_.drill_on_for.count()) / cfg_.drill_ramp.count();
  return cfg_.drill_setpoint_rpm * std::min(1.0, frac);
}

Millis SimulatedBus::advance(Millis dt) {
  if (dt.count() < 0) throw DomainError("cannot advance the device bus by a negative interval");
  if (dt.count() == 0) return state_.clock.now();
  const int open = open_valves();
  if (open > 0) state_.flow_time[open] += dt;
  if (state_.relays[relay::kDrillPress].on && state_.drill_on_for < cfg_.drill_ramp) {
    const auto before = state_.drill_on_for;
    state_.drill_on_for = std::min(cfg_.drill_ramp, state_.drill_on_for + dt);
    if (state_.drill_on_for == cfg_.drill_ramp) {
      const auto reached = state_.clock.now() + (cfg_.drill_ramp - before);
      if (trace_) {
        trace_->record(reached, "drill", "at_speed",
                       std::to_string(static_cast<int>(cfg_.drill_setpoint_rpm)));
      }
    }
  }
  return state_.clock.advance(dt);
}

}  // namespace sieve::hal
