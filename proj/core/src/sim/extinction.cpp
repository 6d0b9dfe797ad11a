#include "sieve/sim/extinction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "sieve/errors.hpp"

namespace sieve::sim {

namespace {

struct MeanSd {
  double mean{0.0};
  double sd{0.0};
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  if (xs.empty()) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return r;
}

}  // namespace

void validate(const ExtinctionPlan& plan) {
  if (plan.iterations < 1) throw ConfigError("extinction plan needs at least one iteration");
  if (plan.samples_n < 1) throw ConfigError("extinction plan needs at least one sample");
  if (plan.replicates < 1) throw ConfigError("extinction plan needs at least one replicate");
  if (plan.threads < 1) throw ConfigError("extinction plan needs at least one thread");
  if (plan.kernel.grind_cycles < 0 || plan.kernel.wash_s < 0.0 || plan.kernel.spray_s < 0.0) {
    throw ConfigError("kernel durations and cycle counts must be >= 0");
  }
  model::validate(plan.soil);
}

SampleRecovery extract_to_extinction(const model::SampleProfile& soil, const ProcessParams& p,
                                     const KernelConfig& k, int iterations, std::uint64_t seed, int replicate,
                                     int sample) {
  SampleRecovery r;
  r.replicate = replicate;
  r.sample = sample;
  IterationStreams streams{seed, static_cast<std::uint64_t>(replicate), static_cast<std::uint64_t>(sample), 0};
  auto synth = streams.stream(step_id::kSynthesize);
  auto ws = Workspace::from_sample(model::synthesize_sample(soil, synth));
  r.inventory = ws.initial_eggs;
  for (int it = 1; it <= iterations; ++it) {
    streams.iteration = static_cast<std::uint64_t>(it);
    r.eggs.push_back(run_iteration(ws, p, k, streams).eggs);
  }
  r.total_recovered = std::accumulate(r.eggs.begin(), r.eggs.end(), std::uint64_t{0});
  std::uint64_t running = 0;
  for (auto e : r.eggs) {
    running += e;
    if (r.total_recovered == 0) {
      r.pct.push_back(0.0);
      r.cum_pct.push_back(0.0);
    } else {
      const double total = static_cast<double>(r.total_recovered);
      r.pct.push_back(100.0 * static_cast<double>(e) / total);
      r.cum_pct.push_back(100.0 * static_cast<double>(running) / total);
    }
  }
  r.extinct = !r.eggs.empty() && r.eggs.back() == 0;
  return r;
}

RecoveryReport run_extinction(const ExtinctionPlan& plan, const ProcessParams& p) {
  validate(plan);
  validate(p);
  RecoveryReport rep;
  rep.method = plan.method;
  rep.soil = plan.soil.label;
  rep.seed = plan.seed;
  rep.iterations = plan.iterations;
  rep.samples_n = plan.samples_n;
  rep.replicates = plan.replicates;

  const auto n = static_cast<std::size_t>(plan.replicates) * static_cast<std::size_t>(plan.samples_n);
  rep.samples.resize(n);
  auto run_one = [&](std::size_t idx) {
    const int replicate = static_cast<int>(idx / static_cast<std::size_t>(plan.samples_n));
    const int sample = static_cast<int>(idx % static_cast<std::size_t>(plan.samples_n));
    rep.samples[idx] = extract_to_extinction(plan.soil, p, plan.kernel, plan.iterations, plan.seed, replicate, sample);
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(plan.threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_one(i);
      });
    }
  }

  for (int it = 0; it < plan.iterations; ++it) {
    std::vector<double> pct, cum;
    for (const auto& s : rep.samples) {
      if (s.total_recovered == 0) continue;
      pct.push_back(s.pct[it]);
      cum.push_back(s.cum_pct[it]);
    }
    const auto a = mean_sd(pct);
    const auto b = mean_sd(cum);
    rep.per_iteration.push_back({it + 1, a.mean, a.sd, b.mean, b.sd});
  }
  for (int r = 0; r < plan.replicates; ++r) {
    std::vector<double> iter1, cum2;
    for (int s = 0; s < plan.samples_n; ++s) {
      const auto& rec = rep.samples[static_cast<std::size_t>(r * plan.samples_n + s)];
      if (rec.total_recovered == 0) continue;
      iter1.push_back(rec.pct[0]);
      cum2.push_back(rec.cum_pct[std::min(1, plan.iterations - 1)]);
    }
    rep.replicate_iter1_mean.push_back(mean_sd(iter1).mean);
    rep.replicate_cum2_mean.push_back(mean_sd(cum2).mean);
  }
  return rep;
}

double RecoveryReport::grand_iter1_mean() const {
  return per_iteration.empty() ? 0.0 : per_iteration.front().mean_pct;
}

double RecoveryReport::grand_cum2_mean() const {
  if (per_iteration.empty()) return 0.0;
  return per_iteration[std::min<std::size_t>(1, per_iteration.size() - 1)].mean_cum_pct;
}

double RecoveryReport::cum2_pass_fraction(double threshold_pct) const {
  if (replicate_cum2_mean.empty()) return 0.0;
  const auto pass = std::count_if(replicate_cum2_mean.begin(), replicate_cum2_mean.end(),
                                  [&](double c) { return c >= threshold_pct; });
  return static_cast<double>(pass) / static_cast<double>(replicate_cum2_mean.size());
}

double RecoveryReport::true_inventory_ratio() const {
  std::uint64_t rec = 0, inv = 0;
  for (const auto& s : samples) {
    rec += s.total_recovered;
    inv += s.inventory;
  }
  return inv == 0 ? 0.0 : static_cast<double>(rec) / static_cast<double>(inv);
}

double RecoveryReport::conditional_capture(int iteration) const {
  if (iteration < 2 || iteration > static_cast<int>(per_iteration.size())) return 0.0;
  const double before = per_iteration[static_cast<std::size_t>(iteration - 2)].mean_cum_pct;
  const double now = per_iteration[static_cast<std::size_t>(iteration - 1)].mean_cum_pct;
  if (before >= 100.0) return 0.0;
  return (now - before) / (100.0 - before);
}

}  // namespace sieve::sim
