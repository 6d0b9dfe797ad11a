#include <benchmark/benchmark.h>

#include "sieve/data_paths.hpp"
#include "sieve/mechanism/transitions.hpp"
#include "sieve/protocol/builders.hpp"
#include "sieve/protocol/config.hpp"
#include "sieve/protocol/executor.hpp"
#include "sieve/protocol/validate.hpp"

using namespace sieve;

static void BM_ExecutorRun(benchmark::State& state) {
  const DataDir data(SIEVE_BENCH_DATA_DIR);
  auto cfg = protocol::load_config(data.config().string()).engine;
  protocol::RunRequest req;
  req.run_id = "run-000001";
  req.kind = static_cast<protocol::ProtocolKind>(state.range(0));
  req.profile = data.profile("muscatine");
  protocol::Executor ex(cfg);
  for (auto _ : state) {
    ++req.seed;
    benchmark::DoNotOptimize(ex.run(req));
  }
}
BENCHMARK(BM_ExecutorRun)->Arg(0)->Arg(1)->Arg(2);

static void BM_ValidateScript(benchmark::State& state) {
  const auto script = protocol::build_full_protocol(protocol::load_config(DataDir(SIEVE_BENCH_DATA_DIR).config().string()).engine.timing);
  const auto start = protocol::initial_layout(protocol::ProtocolKind::Full);
  for (auto _ : state) benchmark::DoNotOptimize(protocol::validate_script(script, start));
}
BENCHMARK(BM_ValidateScript);

static void BM_RotateAndCheck(benchmark::State& state) {
  auto m = mech::cyst_layout();
  for (auto _ : state) {
    m = mech::rotate_stage(m, 1);
    benchmark::DoNotOptimize(mech::check_invariants(m));
  }
}
BENCHMARK(BM_RotateAndCheck);
BENCHMARK_MAIN();
