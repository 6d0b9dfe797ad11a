#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sieve/model/sample.hpp"
#include "sieve/sim/params.hpp"

namespace sieve::sim {

// What an extraction method should achieve on one soil, in percent of the
// eggs recovered to extinction.
struct CalibrationTargets {
  std::string label;
  std::string method{"robotic"};
  std::string soil;  // profile name or path, resolved by the caller
  double iter1_mean{0.0};
  double cum2_min{94.0};
  // Share of replicates that must reach cum2_min.
  double cum2_pass_fraction{0.95};
  // Per-step sub-targets that pin w_transfer and r_rupture in closed form.
  double wash_capture{0.995};  // cysts reaching #60 after a 30 s wash
  double rupture{0.97};        // cysts ruptured after three grind cycles
  double e_release{0.9};
  std::pair<double, double> duration_min{2.3, 2.3};

  std::uint64_t seed{20240611};
  int replicates{60};
  int samples_n{6};
  int iterations{4};
  int bisection_steps{16};
  // Grid points this close to iter1_mean (percentage points) are ranked by
  // how many replicates clear cum2_min rather than by residual.
  double residual_tolerance{0.5};
  std::vector<double> boost_grid{0.0, 0.25, 0.5, 0.75, 1.0};
};

CalibrationTargets targets_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CalibrationTargets& t);
CalibrationTargets load_targets(const std::string& path);

struct CalibrationResult {
  ProcessParams params;
  double achieved_iter1{0.0};
  double achieved_cum2{0.0};
  double achieved_pass_fraction{0.0};
  double residual{0.0};  // |achieved_iter1 - target|, percentage points
  // Lowest iteration-2 conditional capture compatible with the targets:
  // (cum2 - iter1) / (100 - iter1).
  double conditional_capture_bound{0.0};
  double achieved_conditional_capture{0.0};
  int evaluations{0};
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

// Returns 0 when iter1 is already 100.
double conditional_capture_bound(double iter1_pct, double cum2_pct);

// w such that 1 - (1 - w)^units == capture.
double per_unit_probability(double capture, double units);

// Grid over suspend_boost, bisection on f_suspend. Deterministic for a fixed
// targets.seed. Throws CalibrationError when no grid point meets the
// cumulative constraint or the targets contradict each other.
CalibrationResult calibrate(const CalibrationTargets& targets, const model::SampleProfile& soil,
                            const ProcessParams& base = ProcessParams{}, int threads = 1);

MethodProfile to_method_profile(const CalibrationTargets& t, const CalibrationResult& r);

}  // namespace sieve::sim
