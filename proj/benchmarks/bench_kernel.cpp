#include <benchmark/benchmark.h>

#include "sieve/data_paths.hpp"
#include "sieve/model/sieve.hpp"
#include "sieve/sim/extinction.hpp"
#include "sieve/sim/process.hpp"

using namespace sieve;

namespace {

const DataDir& data() {
  static const DataDir d(SIEVE_BENCH_DATA_DIR);
  return d;
}

const model::SoilSample& sample() {
  static const auto s = model::synthesize_sample(data().profile("muscatine"), 1);
  return s;
}

}  // namespace

static void BM_SynthesizeSample(benchmark::State& state) {
  const auto profile = data().profile("muscatine");
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(model::synthesize_sample(profile, ++seed));
}
BENCHMARK(BM_SynthesizeSample);

static void BM_Partition(benchmark::State& state) {
  const auto& b = sample().batch;
  for (auto _ : state) benchmark::DoNotOptimize(model::partition_batch(b, model::Microns{250}));
  state.counters["bins"] = static_cast<double>(b.bin_count());
}
BENCHMARK(BM_Partition);

static void BM_MixAndSettle(benchmark::State& state) {
  const sim::ProcessParams p;
  auto rng = make_stream(1, {});
  for (auto _ : state) benchmark::DoNotOptimize(sim::mix_and_settle(sample().batch, p, 1.0, rng));
}
BENCHMARK(BM_MixAndSettle);

static void BM_Iteration(benchmark::State& state) {
  const auto p = data().params("muscatine", "robotic").params;
  std::uint64_t n = 0;
  for (auto _ : state) {
    auto ws = sim::Workspace::from_sample(sample());
    benchmark::DoNotOptimize(sim::run_iteration(ws, p, {}, {1, 0, ++n, 1}));
  }
}
BENCHMARK(BM_Iteration);

// Full-size extinction curve, thread count from the argument.
static void BM_ExtinctionPanel(benchmark::State& state) {
  sim::ExtinctionPlan plan;
  plan.soil = data().profile("nevada");
  plan.replicates = 200;
  plan.threads = static_cast<int>(state.range(0));
  const auto p = data().params("nevada", "robotic").params;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run_extinction(plan, p));
}
BENCHMARK(BM_ExtinctionPanel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
