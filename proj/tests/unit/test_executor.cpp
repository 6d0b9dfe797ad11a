#include <gtest/gtest.h>

#include <thread>

#include "sieve/hal/trace.hpp"
#include "sieve/protocol/builders.hpp"
#include "sieve/protocol/config.hpp"
#include "sieve/protocol/executor.hpp"
#include "test_support.hpp"

using namespace sieve;
using namespace sieve::protocol;

namespace {

EngineConfig engine(const sim::ProcessParams& p = {}) {
  auto cfg = load_config(fixtures::shipped_data().config().string()).engine;
  cfg.params = p;
  return cfg;
}

RunRequest request(ProtocolKind kind, std::uint64_t seed = 1) {
  RunRequest r;
  r.run_id = "run-000001";
  r.kind = kind;
  r.profile = fixtures::shipped_data().profile("muscatine");
  r.seed = seed;
  return r;
}

// Aborts when the given step is entered.
EventSink abort_at(Executor& ex, int step) {
  return [&ex, step](const TelemetryEvent& e, const mech::MachineState&) {
    if (e.phase == "enter" && e.step == step) ex.abort();
  };
}

int step_index(const ProtocolScript& s, std::string_view action, int nth = 0) {
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    if (action_name(s.steps[i].action) == action && nth-- == 0) return static_cast<int>(i);
  }
  return -1;
}

std::size_t trace_index(const hal::TraceLog& log, std::size_t from, std::string_view device,
                        std::string_view value = {}) {
  for (std::size_t i = from; i < log.size(); ++i) {
    const auto& l = log.lines()[i];
    if (l.device == device && (value.empty() || l.value == value)) return i;
  }
  return log.size();
}

}  // namespace

TEST(Executor, CystRunCompletesInExactlyTheScriptTotal) {
  Executor ex(engine());
  const auto rec = ex.run(request(ProtocolKind::Cyst));
  EXPECT_EQ(rec.status, RunStatus::Completed);
  EXPECT_EQ(rec.end_ms - rec.start_ms, 140000);
  EXPECT_EQ(rec.expected_total_ms, 140000);
  EXPECT_TRUE(ex.machine().is_safe());
  EXPECT_EQ(ex.machine(), mech::egg_layout());
}

TEST(Executor, EggRunCompletesInNinetyEightSeconds) {
  Executor ex(engine());
  const auto rec = ex.run(request(ProtocolKind::Egg));
  EXPECT_EQ(rec.status, RunStatus::Completed);
  EXPECT_EQ(rec.end_ms - rec.start_ms, 98000);
  EXPECT_GT(rec.output_counts.at("eggs"), 0u);
}

TEST(Executor, SixtyHoldsEverySuspendedCystWhenTransfersAreLossless) {
  sim::ProcessParams p;
  p.w_transfer = 1.0;
  p.losses = {};
  p.losses.decant_spill = p.losses.transfer = p.losses.collect = 0.0;
  Executor ex(engine(p));
  const auto req = request(ProtocolKind::Cyst, 5);
  const auto initial = model::synthesize_sample(req.profile, req.seed).batch.count(model::ParticleClass::Cyst);
  const auto rec = ex.run(req);
  ASSERT_EQ(rec.status, RunStatus::Completed);
  auto& ws = const_cast<sim::Workspace&>(ex.workspace());
  const auto left_in_bucket = ws.bucket.count(model::ParticleClass::Cyst);
  const auto on_60 = ws.sieve(model::kMesh60).count(model::ParticleClass::Cyst);
  EXPECT_GT(on_60, 0u);
  EXPECT_EQ(on_60, initial - left_in_bucket);
  EXPECT_EQ(ws.sieve(model::kMesh20).count(model::ParticleClass::Cyst), 0u);
  EXPECT_EQ(ws.drain.count(model::ParticleClass::Cyst), 0u);
  EXPECT_EQ(rec.output_counts.at("cysts"), on_60);
  EXPECT_TRUE(ws.conserved());
}

TEST(Executor, LosslessFullRunRecoversEveryEgg) {
  Executor ex(engine(sim::lossless_params()));
  const auto req = request(ProtocolKind::Full, 11);
  const auto sample = model::synthesize_sample(req.profile, req.seed);
  const auto rec = ex.run(req);
  ASSERT_EQ(rec.status, RunStatus::Completed);
  EXPECT_EQ(rec.output_counts.at("eggs"), sample.batch.egg_inventory());
  EXPECT_EQ(rec.output_counts.at("cysts"), sample.batch.count(model::ParticleClass::Cyst));
  EXPECT_EQ(rec.end_ms - rec.start_ms, 268000);
}

TEST(Executor, EggsCollectedEqualReleasedTimesEfficiencies) {
  // Lossless transfer chain: every released egg reaches the container.
  auto p = sim::lossless_params();
  p.r_rupture = 0.5;
  p.e_release = 0.7;
  Executor ex(engine(p));
  const auto rec = ex.run(request(ProtocolKind::Full, 3));
  ASSERT_EQ(rec.status, RunStatus::Completed);
  EXPECT_EQ(rec.output_counts.at("eggs"), ex.workspace().ledger.released);
  EXPECT_GT(ex.workspace().ledger.retained, 0u);
}

TEST(Executor, TelemetryHasEnterAndExitPerStep) {
  Executor ex(engine());
  const auto rec = ex.run(request(ProtocolKind::Egg));
  std::size_t boundaries = 0;
  for (std::size_t i = 0; i < rec.telemetry.size(); ++i) {
    const auto& e = rec.telemetry[i];
    EXPECT_EQ(e.seq, i + 1);
    EXPECT_EQ(e.snapshot_ref, rec.id + "/" + std::to_string(e.seq));
    if (e.phase == "enter" || e.phase == "exit") ++boundaries;
    if (i > 0) EXPECT_GE(e.t_ms, rec.telemetry[i - 1].t_ms);
  }
  EXPECT_EQ(boundaries, 2 * rec.steps_executed);
  EXPECT_EQ(rec.telemetry.front().phase, "start");
  EXPECT_EQ(rec.telemetry.back().phase, "end");
}

TEST(Executor, AbortIdleEngineIsNotRunning) {
  Executor ex(engine());
  EXPECT_THROW(ex.abort(), NotRunning);
}

TEST(Executor, AbortDuringWashReachesSafeState) {
  Executor ex(engine());
  const auto script = build_cyst_protocol(ex.config().timing);
  const int wash = step_index(script, "Wash");
  ASSERT_GE(wash, 0);
  const auto rec = ex.run(request(ProtocolKind::Cyst), abort_at(ex, wash));
  EXPECT_EQ(rec.status, RunStatus::Aborted);
  EXPECT_NE(rec.reason.find("Wash"), std::string::npos);
  const auto m = ex.machine();
  EXPECT_TRUE(m.is_safe());
  EXPECT_FALSE(ex.devices().relays[hal::relay::kSprayerValve].on);
  EXPECT_FALSE(ex.devices().relays[hal::relay::kNozzleValve].on);
  EXPECT_FALSE(ex.devices().relays[hal::relay::kDrillPress].on);
  EXPECT_EQ(rec.steps_executed, static_cast<std::size_t>(wash + 1));
  std::vector<std::string> tail;
  for (auto it = rec.telemetry.end() - 3; it != rec.telemetry.end(); ++it) tail.push_back(it->phase);
  EXPECT_EQ(tail, (std::vector<std::string>{"abort", "safe_state", "end"}));
}

TEST(Executor, AbortMidGrindStopsDrillBeforeRaisingPad) {
  Executor ex(engine());
  const auto script = build_egg_protocol(ex.config().timing);
  const int grind = step_index(script, "Grind", 1);
  hal::TraceLog trace;
  const auto rec = ex.run(request(ProtocolKind::Egg), abort_at(ex, grind), &trace);
  ASSERT_EQ(rec.status, RunStatus::Aborted);
  const std::int64_t abort_t = rec.telemetry[rec.telemetry.size() - 3].t_ms;
  std::size_t from = 0;
  while (from < trace.size() && trace.lines()[from].now_ms < abort_t) ++from;
  const auto drill_off = trace_index(trace, from, "relay2", "off");
  const auto raise = trace_index(trace, from, "grinder_quill");
  ASSERT_LT(drill_off, trace.size());
  ASSERT_LT(raise, trace.size());
  EXPECT_LT(drill_off, raise);
  EXPECT_LT(std::stoll(trace.lines()[raise].value), 0);  // negative quill steps lift the pad
  EXPECT_TRUE(ex.machine().is_safe());
}

TEST(Executor, SecondAbortIsNotRunningAndRecordUnchanged) {
  Executor ex(engine());
  int aborts = 0, rejected = 0;
  auto sink = [&](const TelemetryEvent& e, const mech::MachineState&) {
    if (e.phase == "enter" && e.step == 2) {
      ex.abort();
      ++aborts;
      try {
        ex.abort();
      } catch (const NotRunning&) {
        ++rejected;
      }
    }
  };
  const auto rec = ex.run(request(ProtocolKind::Cyst), sink);
  EXPECT_EQ(aborts, 1);
  EXPECT_EQ(rejected, 1);
  EXPECT_EQ(rec.status, RunStatus::Aborted);
  EXPECT_THROW(ex.abort(), NotRunning);
}

TEST(Executor, AbortFromAnotherThread) {
  auto cfg = engine();
  Executor ex(cfg);
  auto req = request(ProtocolKind::Cyst);
  req.speed = 200.0;  // 140 s of virtual time in about 0.7 s
  std::thread t([&] {
    while (!ex.running()) std::this_thread::yield();
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    ex.abort();
  });
  const auto rec = ex.run(req);
  t.join();
  EXPECT_EQ(rec.status, RunStatus::Aborted);
  EXPECT_TRUE(ex.machine().is_safe());
}

TEST(Executor, EveryStepAbortLeavesSafeState) {
  for (auto kind : {ProtocolKind::Cyst, ProtocolKind::Egg}) {
    Executor probe(engine());
    const auto n = static_cast<int>(build_protocol(kind, probe.config().timing).steps.size());
    for (int step = 0; step < n; ++step) {
      Executor ex(engine());
      const auto rec = ex.run(request(kind), abort_at(ex, step));
      ASSERT_EQ(rec.status, RunStatus::Aborted) << "step " << step;
      const auto m = ex.machine();
      EXPECT_FALSE(m.valves.sprayer || m.valves.nozzle || m.valves.drill) << "step " << step;
      EXPECT_EQ(m.grinder.rpm, 0.0);
      EXPECT_TRUE(m.grinder.raised()) << "step " << step;
      EXPECT_TRUE(mech::check_invariants(m).empty()) << "step " << step;
    }
  }
}

TEST(Executor, InvalidScriptRejectedBeforeRunning) {
  Executor ex(engine());
  ProtocolScript s;
  s.steps.push_back({action::Rotate{1}, 1});
  s.expected_total_ms = 1;
  RunRecord meta;
  EXPECT_THROW(ex.execute(s, mech::cyst_layout(), {}, meta), InvalidScript);
  EXPECT_FALSE(ex.running());
}

TEST(Executor, CystSampleKeepsOnlyCysts) {
  const auto profile = fixtures::shipped_data().profile("nevada");
  const auto ws = prepare_workspace(ProtocolKind::Egg, profile, 4);
  EXPECT_TRUE(ws.bucket.empty());
  const auto& on60 = ws.sieves.at(model::kMesh60);
  EXPECT_EQ(on60.total(), on60.count(model::ParticleClass::Cyst));
  EXPECT_EQ(parse_input_type("CystSample"), InputType::CystSample);
  EXPECT_EQ(default_protocol(InputType::CystSample), ProtocolKind::Egg);
  EXPECT_EQ(default_protocol(InputType::SoilSample), ProtocolKind::Cyst);
}
