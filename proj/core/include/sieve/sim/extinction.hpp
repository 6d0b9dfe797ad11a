#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sieve/model/sample.hpp"
#include "sieve/sim/params.hpp"
#include "sieve/sim/process.hpp"

namespace sieve::sim {

// Repeated extraction of the same soil until (nominally) no eggs come back.
struct ExtinctionPlan {
  int iterations{4};
  int samples_n{6};
  int replicates{1};
  std::string method{"robotic"};
  model::SampleProfile soil;
  std::uint64_t seed{1};
  KernelConfig kernel;
  int threads{1};
};

// Throws ConfigError for non-positive counts.
void validate(const ExtinctionPlan& plan);

struct SampleRecovery {
  int replicate{0};
  int sample{0};
  std::vector<std::uint64_t> eggs;
  // Percent of the eggs recovered over all iterations; zero when nothing was
  // ever recovered.
  std::vector<double> pct;
  std::vector<double> cum_pct;
  std::uint64_t total_recovered{0};
  // Eggs inside cysts and free in the soil when the sample was drawn.
  std::uint64_t inventory{0};
  bool extinct{false};  // last iteration recovered zero eggs

  bool operator==(const SampleRecovery&) const = default;
};

struct IterationStats {
  int iteration{0};  // 1-based
  double mean_pct{0.0};
  double sd_pct{0.0};
  double mean_cum_pct{0.0};
  double sd_cum_pct{0.0};

  bool operator==(const IterationStats&) const = default;
};

struct RecoveryReport {
  std::string method;
  std::string soil;
  std::uint64_t seed{0};
  int iterations{0};
  int samples_n{0};
  int replicates{0};

  std::vector<SampleRecovery> samples;  // replicate-major
  // Across every sample with a non-zero recovery.
  std::vector<IterationStats> per_iteration;
  // Replicate means over its samples_n samples.
  std::vector<double> replicate_iter1_mean;
  std::vector<double> replicate_cum2_mean;

  double grand_iter1_mean() const;
  double grand_cum2_mean() const;
  // Share of replicates whose mean cumulative recovery after two iterations
  // reaches the threshold (percent).
  double cum2_pass_fraction(double threshold_pct = 94.0) const;
  // Mean recovered / true synthetic inventory; unnormalized diagnostic.
  double true_inventory_ratio() const;
  // Mean share of what iteration 1 left behind that iteration 2 recovered.
  double conditional_capture(int iteration) const;

  bool operator==(const RecoveryReport&) const = default;
};

SampleRecovery extract_to_extinction(const model::SampleProfile& soil, const ProcessParams& p,
                                     const KernelConfig& k, int iterations, std::uint64_t seed, int replicate,
                                     int sample);

// Replicates run in parallel when plan.threads > 1; the report does not depend
// on the thread count.
RecoveryReport run_extinction(const ExtinctionPlan& plan, const ProcessParams& p);

}  // namespace sieve::sim
