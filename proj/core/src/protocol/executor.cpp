#include "sieve/protocol/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "sieve/mechanism/transitions.hpp"
#include "sieve/protocol/validate.hpp"

namespace sieve::protocol {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// Stream ids for executor-side process hooks, clear of the kernel's ids.
constexpr std::uint64_t kHookStreamBase = 10000;

}  // namespace

std::string_view to_string(InputType t) {
  return t == InputType::SoilSample ? "SoilSample" : "CystSample";
}

InputType parse_input_type(std::string_view s) {
  if (s == "SoilSample") return InputType::SoilSample;
  if (s == "CystSample") return InputType::CystSample;
  throw ConfigError("unknown input type " + std::string(s) + " (expected SoilSample or CystSample)");
}

ProtocolKind default_protocol(InputType t) {
  return t == InputType::SoilSample ? ProtocolKind::Cyst : ProtocolKind::Egg;
}

sim::Workspace prepare_workspace(ProtocolKind kind, const model::SampleProfile& profile, std::uint64_t seed) {
  auto sample = model::synthesize_sample(profile, seed);
  if (kind != ProtocolKind::Egg) return sim::Workspace::from_sample(sample);
  auto cysts = sample.batch.filter([](const model::BinKey& k) { return k.cls == model::ParticleClass::Cyst; });
  return sim::Workspace::from_cysts_on(model::kMesh60, cysts);
}

Executor::Executor(EngineConfig cfg) : cfg_(std::move(cfg)), bus_(cfg_.hal) {
  if (cfg_.tick_ms <= 0) throw ConfigError("tick_ms must be positive");
  sim::validate(cfg_.params);
}

mech::MachineState Executor::machine() const {
  std::lock_guard lock(machine_mu_);
  return machine_;
}

void Executor::set_machine(const mech::MachineState& m) {
  std::lock_guard lock(machine_mu_);
  machine_ = m;
}

void Executor::abort() {
  int expected = kRunning;
  if (!phase_.compare_exchange_strong(expected, kAborting)) throw NotRunning();
}

void Executor::emit(RunRecord& rec, int step, std::string_view action, std::string_view phase,
                    const EventSink& sink) {
  TelemetryEvent e;
  e.run_id = rec.id;
  e.seq = rec.telemetry.size() + 1;
  e.t_ms = bus_.now().count();
  e.step = step;
  e.action = std::string(action);
  e.phase = std::string(phase);
  e.snapshot_ref = rec.id + "/" + std::to_string(e.seq);
  rec.telemetry.push_back(e);
  if (sink) sink(e, machine());
}

void Executor::advance(std::int64_t ms, bool abortable) {
  while (ms > 0) {
    if (abortable && phase_.load() == kAborting) throw Aborted{};
    const auto dt = std::min(ms, cfg_.tick_ms);
    bus_.advance(hal::Millis{dt});
    if (speed_ > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(static_cast<double>(dt) / speed_));
    }
    ms -= dt;
  }
  if (abortable && phase_.load() == kAborting) throw Aborted{};
}

void Executor::run_hook(const op::Sim& h, int step, RunRecord& rec) {
  const sim::IterationStreams streams{seed_, 0, 0, 1};
  auto rng = streams.stream(kHookStreamBase + static_cast<std::uint64_t>(step));
  const auto& p = cfg_.params;
  switch (h.hook) {
    case SimHook::Decant: sim::stage_decant(ws_, p, streams); break;
    case SimHook::Wash: sim::stage_wash(ws_, h.sieve, h.below, h.duration_s, p, rng); break;
    case SimHook::Transfer:
      sim::stage_transfer_loss(ws_, h.sieve, p, rng);
      if (h.sieve == model::kMesh60) rec.output_counts["cysts"] = ws_.sieve(model::kMesh60).count(model::ParticleClass::Cyst);
      break;
    case SimHook::Grind: sim::stage_grind(ws_, p, rng); break;
    case SimHook::Spray: sim::stage_spray(ws_, h.duration_s, p, rng); break;
    case SimHook::Collect: rec.output_counts["eggs"] += sim::stage_collect(ws_, p, rng); break;
  }
}

void Executor::safe_state() {
  auto m = machine();
  // Power first, motion second: never move a turning pad.
  m = mech::set_sprayer_valve(m, false);
  bus_.set_relay(hal::relay::kSprayerValve, false);
  m = mech::set_nozzle_valve(m, false);
  bus_.set_relay(hal::relay::kNozzleValve, false);
  m = mech::grinder_set(m, m.grinder.pad_height_mm, false);
  bus_.set_relay(hal::relay::kDrillPress, false);
  set_machine(m);

  if (!m.grinder.raised()) {
    const double from = m.grinder.pad_height_mm;
    m = mech::grinder_set(m, mech::kPadClearMm, false);
    bus_.step(hal::Stepper::GrinderQuill, -std::llround((mech::kPadClearMm - from) * kQuillStepsPerMm));
  }
  if (m.sprayer.engaged_over) {
    m = mech::sprayer_retract(m);
    bus_.set_servo(kServoSprayerRetracted);
  }
  if (m.stage.compression != mech::Compression::Uncompressed && m.gripper.parked()) {
    const auto from = mech::heights_for(m.stage.compression);
    const auto to = mech::heights_for(mech::Compression::Uncompressed);
    double travel = 0.0;
    for (int i = 0; i < mech::kLevels; ++i) travel += to[i] - from[i];
    m = mech::set_compression(m, mech::Compression::Uncompressed);
    bus_.step(hal::Stepper::StageLift, std::llround(travel * kLiftStepsPerMm));
  }
  set_machine(m);
}

RunRecord Executor::run(const RunRequest& req, const EventSink& sink, hal::TraceLog* trace) {
  return run(build_protocol(req.kind, cfg_.timing), req, sink, trace);
}

RunRecord Executor::run(const ProtocolScript& script, const RunRequest& req, const EventSink& sink,
                        hal::TraceLog* trace) {
  RunRecord meta;
  meta.id = req.run_id;
  meta.protocol = std::string(to_string(req.kind));
  meta.input_type = std::string(to_string(req.kind == ProtocolKind::Egg ? InputType::CystSample : InputType::SoilSample));
  meta.profile = req.profile.label;
  meta.seed = req.seed;
  meta.speed = req.speed;
  return execute(script, initial_layout(req.kind), prepare_workspace(req.kind, req.profile, req.seed), meta, sink,
                 trace);
}

RunRecord Executor::execute(const ProtocolScript& script, const mech::MachineState& initial, sim::Workspace ws,
                            RunRecord rec, const EventSink& sink, hal::TraceLog* trace) {
  const auto report = validate_script(script, initial, cfg_.hal);
  if (!report.ok()) {
    std::string msg = "script failed validation:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw InvalidScript(msg);
  }
  int expected = kIdle;
  if (!phase_.compare_exchange_strong(expected, kRunning)) throw ConfigError("executor is already running");

  bus_ = hal::SimulatedBus(cfg_.hal, trace);
  set_machine(initial);
  ws_ = std::move(ws);
  seed_ = rec.seed;
  speed_ = rec.speed;
  rec.script = std::string(to_string(script.name));
  rec.expected_total_ms = script.expected_total_ms;
  rec.start_ms = bus_.now().count();
  rec.status = RunStatus::Running;
  rec.telemetry.clear();
  rec.output_counts.clear();
  emit(rec, -1, "", "start", sink);

  int current = -1;
  std::string_view current_action;
  try {
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
      const auto& step = script.steps[i];
      current = static_cast<int>(i);
      current_action = action_name(step.action);
      if (phase_.load() == kAborting) throw Aborted{};
      emit(rec, current, current_action, "enter", sink);
      const auto t0 = bus_.now().count();
      const auto plan = plan_step(step, machine(), cfg_.hal);
      for (const auto& o : plan.ops) {
        std::visit(overloaded{
                       [&](const op::Mech& m) { set_machine(mech::apply(machine(), m.command)); },
                       [&](const op::Motor& m) { bus_.step(m.stepper, m.steps); },
                       [&](const op::Relay& r) { bus_.set_relay(r.index, r.on); },
                       [&](const op::Servo& s) { bus_.set_servo(s.angle_deg); },
                       [&](const op::Hold& h) { advance(h.ms, true); },
                       [&](const op::Sim& s) { run_hook(s, current, rec); },
                   },
                   o);
      }
      advance(step.duration_ms - (bus_.now().count() - t0), true);
      ++rec.steps_executed;
      emit(rec, current, current_action, "exit", sink);
      current = -1;
    }
    rec.status = RunStatus::Completed;
  } catch (const Aborted&) {
    rec.status = RunStatus::Aborted;
    rec.reason = current >= 0 ? "aborted during step " + std::to_string(current) + " (" + std::string(current_action) + ")"
                              : "aborted between steps";
  } catch (const std::exception& e) {
    rec.status = RunStatus::Faulted;
    rec.reason = e.what();
  }

  if (rec.status != RunStatus::Completed) {
    if (current >= 0) {
      ++rec.steps_executed;
      emit(rec, current, current_action, "exit", sink);
    }
    emit(rec, -1, "", rec.status == RunStatus::Aborted ? "abort" : "fault", sink);
    try {
      safe_state();
    } catch (const std::exception& e) {
      rec.status = RunStatus::Faulted;
      rec.reason += "; safe state failed: " + std::string(e.what());
    }
    emit(rec, -1, "", "safe_state", sink);
  }
  rec.end_ms = bus_.now().count();
  emit(rec, -1, "", "end", sink);
  phase_.store(kIdle);
  return rec;
}

}  // namespace sieve::protocol
