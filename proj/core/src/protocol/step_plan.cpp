#include "sieve/protocol/step_plan.hpp"

#include <cmath>
#include <cstdlib>

#include "sieve/errors.hpp"

namespace sieve::protocol {

using mech::InterlockViolation;
using mech::Level;
namespace station = mech::station;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& reason) {
  if (!ok) throw InterlockViolation(reason);
}

class Planner {
 public:
  Planner(const mech::MachineState& s, const hal::HalConfig& hal) : s_(s), hal_(hal) {}

  void mech(mech::Command c) { plan_.ops.push_back(op::Mech{std::move(c)}); }
  void motor(hal::Stepper st, std::int64_t steps) {
    if (steps == 0) return;
    plan_.ops.push_back(op::Motor{st, steps});
    plan_.motion_ms += std::llabs(steps) * hal_.step_period.count();
  }
  void relay(int i, bool on) { plan_.ops.push_back(op::Relay{i, on}); }
  void servo(int deg) { plan_.ops.push_back(op::Servo{deg}); }
  void hold(std::int64_t ms) {
    if (ms <= 0) return;
    plan_.ops.push_back(op::Hold{ms});
    plan_.hold_ms += ms;
  }
  void sim(op::Sim s) { plan_.ops.push_back(s); }

  std::int64_t quarter_steps() const {
    return std::llround(hal_.steps_per_rev * hal_.stage_gear_ratio / 4.0);
  }

  void quill_to(double target_mm, bool spinning) {
    const double from = s_.grinder.pad_height_mm;
    mech(mech::cmd::Grinder{target_mm, spinning});
    // Positive steps drive the quill down.
    motor(hal::Stepper::GrinderQuill, std::llround((from - target_mm) * kQuillStepsPerMm));
  }

  StepPlan take() { return std::move(plan_); }

 private:
  const mech::MachineState& s_;
  const hal::HalConfig& hal_;
  StepPlan plan_;
};

}  // namespace

StepPlan plan_step(const ProtocolStep& step, const mech::MachineState& s, const hal::HalConfig& hal) {
  Planner p(s, hal);
  std::visit(
      overloaded{
          [&](const action::Decant&) {
            require(s.stage.at({Level::Top, station::kDecant}) == model::kMesh20 &&
                        s.stage.at({Level::Middle, station::kDecant}) == model::kMesh60,
                    "decant needs #20 over #60 at the decant station");
            require(s.stage.compression == mech::Compression::Uncompressed, "decant onto a compressed stage");
            p.sim({SimHook::Decant});
          },
          [&](const action::Wash& w) {
            const auto col = s.stage.column(station::kWash);
            require(!col.empty() && col.front() == w.sieve,
                    "wash target " + model::to_string(w.sieve) + " is not on top at the washing station");
            require(col.size() >= 2, "nothing below " + model::to_string(w.sieve) + " to wash into");
            p.mech(mech::cmd::SprayerEngage{});
            p.servo(kServoSprayerEngaged);
            p.mech(mech::cmd::SprayerValve{true});
            p.relay(hal::relay::kSprayerValve, true);
            p.hold(nominal_ms(step.action));
            p.sim({SimHook::Wash, w.sieve, col[1], w.duration_s});
            p.mech(mech::cmd::SprayerValve{false});
            p.relay(hal::relay::kSprayerValve, false);
          },
          [&](const action::Rotate& r) {
            p.mech(mech::cmd::Rotate{r.quarter_turns});
            p.motor(hal::Stepper::StageRotation, r.quarter_turns * p.quarter_steps());
          },
          [&](const action::Compress& c) {
            const auto from = mech::heights_for(s.stage.compression);
            const auto to = mech::heights_for(c.target);
            double travel = 0.0;
            for (int i = 0; i < mech::kLevels; ++i) travel += to[i] - from[i];
            p.mech(mech::cmd::Compress{c.target});
            p.motor(hal::Stepper::StageLift, std::llround(travel * kLiftStepsPerMm));
          },
          [&](const action::SprayerRetract&) {
            p.mech(mech::cmd::SprayerRetract{});
            p.servo(kServoSprayerRetracted);
          },
          [&](const action::GripperTransfer& t) {
            const auto moved = s.stage.at(t.from);
            p.mech(mech::cmd::Transfer{t.from, t.to});
            const std::int64_t reach = 100;
            const std::int64_t carry = 100 * (t.to.position - t.from.position);
            const std::int64_t lift = 50;
            p.motor(hal::Stepper::GripperSwing, reach);
            p.motor(hal::Stepper::GripperWrist, lift);
            p.motor(hal::Stepper::GripperSwing, carry);
            p.motor(hal::Stepper::GripperWrist, -lift);
            p.motor(hal::Stepper::GripperSwing, -(reach + carry));
            if (moved) p.sim({SimHook::Transfer, *moved});
          },
          [&](const action::GrinderLower& g) {
            require(g.height_mm <= s.grinder.pad_height_mm, "GrinderLower target is above the pad");
            p.quill_to(g.height_mm, s.grinder.spinning);
          },
          [&](const action::GrinderSpin& g) {
            p.mech(mech::cmd::Grinder{s.grinder.pad_height_mm, g.on});
            p.relay(hal::relay::kDrillPress, g.on);
          },
          [&](const action::Grind& g) {
            require(s.grinder.in_contact(), "grind without the pad on the mesh");
            require(s.grinder.spinning, "grind with the drill stopped");
            p.hold(nominal_ms(step.action));
            p.sim({SimHook::Grind, model::kMesh60, model::kMesh200, g.duration_s});
          },
          [&](const action::GrinderRaise& g) {
            require(g.height_mm >= s.grinder.pad_height_mm, "GrinderRaise target is below the pad");
            p.quill_to(g.height_mm, s.grinder.spinning);
          },
          [&](const action::NozzleSpray& n) {
            require(!s.grinder.in_contact(), "nozzle spray with the pad on the mesh");
            require(s.stage.compression == mech::Compression::Full, "nozzle spray over an unstacked column");
            require(s.stage.column(station::kGrinder) ==
                        std::vector<model::SieveId>{model::kMesh60, model::kMesh200, model::kMesh500},
                    "nozzle spray needs #60 over #200 over #500 at the grinder");
            p.mech(mech::cmd::NozzleValve{true});
            p.relay(hal::relay::kNozzleValve, true);
            p.hold(nominal_ms(step.action));
            p.sim({SimHook::Spray, {}, {}, n.duration_s});
            p.mech(mech::cmd::NozzleValve{false});
            p.relay(hal::relay::kNozzleValve, false);
          },
          [&](const action::CollectOutput&) {
            require(s.grinder.raised() && !s.grinder.spinning, "collect with the grinder engaged");
            require(s.stage.at({Level::Bottom, station::kGrinder}) == model::kMesh500,
                    "collect needs #500 at the bottom of the grinder column");
            p.sim({SimHook::Collect, model::kMesh500});
          },
          [&](const action::Dwell&) { p.hold(nominal_ms(step.action)); },
      },
      step.action);
  return p.take();
}

mech::MachineState apply_mechanics(const StepPlan& plan, const mech::MachineState& s) {
  auto out = s;
  for (const auto& o : plan.ops) {
    if (const auto* m = std::get_if<op::Mech>(&o)) out = mech::apply(out, m->command);
  }
  return out;
}

}  // namespace sieve::protocol
