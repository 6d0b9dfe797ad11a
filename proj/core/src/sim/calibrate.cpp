#include "sieve/sim/calibrate.hpp"

#include <cmath>
#include <fstream>
#include <optional>

#include "sieve/errors.hpp"
#include "sieve/sim/extinction.hpp"

namespace sieve::sim {

CalibrationTargets targets_from_json(const nlohmann::json& j) {
  CalibrationTargets t;
  try {
    t.label = j.value("label", t.label);
    t.method = j.value("method", t.method);
    t.soil = j.value("soil", t.soil);
    t.iter1_mean = j.at("iter1_mean").get<double>();
    t.cum2_min = j.value("cum2_min", t.cum2_min);
    t.cum2_pass_fraction = j.value("cum2_pass_fraction", t.cum2_pass_fraction);
    t.wash_capture = j.value("wash_capture", t.wash_capture);
    t.rupture = j.value("rupture", t.rupture);
    t.e_release = j.value("e_release", t.e_release);
    if (j.contains("duration_min")) {
      const auto& d = j.at("duration_min");
      t.duration_min = {d.at(0).get<double>(), d.at(1).get<double>()};
    }
    t.seed = j.value("seed", t.seed);
    t.replicates = j.value("replicates", t.replicates);
    t.samples_n = j.value("samples", t.samples_n);
    t.iterations = j.value("iterations", t.iterations);
    t.bisection_steps = j.value("bisection_steps", t.bisection_steps);
    t.residual_tolerance = j.value("residual_tolerance", t.residual_tolerance);
    if (j.contains("boost_grid")) t.boost_grid = j.at("boost_grid").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("calibration targets: ") + e.what());
  }
  if (t.iter1_mean < 0.0 || t.iter1_mean > 100.0 || t.cum2_min < 0.0 || t.cum2_min > 100.0) {
    throw ConfigError("calibration targets must be percentages in [0, 100]");
  }
  if (t.replicates < 1 || t.samples_n < 1 || t.iterations < 2) {
    throw ConfigError("calibration needs replicates >= 1, samples >= 1 and iterations >= 2");
  }
  if (t.boost_grid.empty()) throw ConfigError("calibration boost grid is empty");
  return t;
}

nlohmann::json to_json(const CalibrationTargets& t) {
  return {{"label", t.label},
          {"method", t.method},
          {"soil", t.soil},
          {"iter1_mean", t.iter1_mean},
          {"cum2_min", t.cum2_min},
          {"cum2_pass_fraction", t.cum2_pass_fraction},
          {"wash_capture", t.wash_capture},
          {"rupture", t.rupture},
          {"e_release", t.e_release},
          {"duration_min", {t.duration_min.first, t.duration_min.second}},
          {"seed", t.seed},
          {"replicates", t.replicates},
          {"samples", t.samples_n},
          {"iterations", t.iterations},
          {"bisection_steps", t.bisection_steps},
          {"residual_tolerance", t.residual_tolerance},
          {"boost_grid", t.boost_grid}};
}

CalibrationTargets load_targets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open targets file " + path);
  try {
    return targets_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("targets file " + path + ": " + e.what());
  }
}

double conditional_capture_bound(double iter1_pct, double cum2_pct) {
  if (iter1_pct >= 100.0) return 0.0;
  return (cum2_pct - iter1_pct) / (100.0 - iter1_pct);
}

double per_unit_probability(double capture, double units) {
  if (units <= 0.0) throw DomainError("units must be positive");
  if (capture <= 0.0) return 0.0;
  if (capture >= 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - capture, 1.0 / units);
}

namespace {

struct Evaluation {
  ProcessParams params;
  double iter1{0.0};
  double cum2{0.0};
  double pass{0.0};
  double conditional{0.0};
};

Evaluation evaluate(const CalibrationTargets& t, const model::SampleProfile& soil, const ProcessParams& p,
                    int threads) {
  ExtinctionPlan plan;
  plan.iterations = t.iterations;
  plan.samples_n = t.samples_n;
  plan.replicates = t.replicates;
  plan.method = t.method;
  plan.soil = soil;
  plan.seed = t.seed;
  plan.threads = threads;
  const auto rep = run_extinction(plan, p);
  return {p, rep.grand_iter1_mean(), rep.grand_cum2_mean(), rep.cum2_pass_fraction(t.cum2_min),
          rep.conditional_capture(2)};
}

bool feasible(const CalibrationTargets& t, const Evaluation& e) {
  return e.pass >= t.cum2_pass_fraction && e.cum2 >= t.cum2_min;
}

}  // namespace

CalibrationResult calibrate(const CalibrationTargets& t, const model::SampleProfile& soil,
                            const ProcessParams& base, int threads) {
  if (t.iter1_mean > t.cum2_min) {
    throw CalibrationError("contradictory targets: iteration-1 mean exceeds the two-iteration minimum",
                           t.iter1_mean - t.cum2_min);
  }
  CalibrationResult result;
  result.conditional_capture_bound = conditional_capture_bound(t.iter1_mean, t.cum2_min);

  if (t.iter1_mean >= 100.0) {
    result.params = lossless_params();
    const auto e = evaluate(t, soil, result.params, threads);
    result.achieved_iter1 = e.iter1;
    result.achieved_cum2 = e.cum2;
    result.achieved_pass_fraction = e.pass;
    result.achieved_conditional_capture = e.conditional;
    result.residual = std::abs(e.iter1 - t.iter1_mean);
    result.evaluations = 1;
    return result;
  }

  ProcessParams p = base;
  p.w_transfer = per_unit_probability(t.wash_capture, 3.0);
  p.r_rupture = per_unit_probability(t.rupture, 3.0);
  p.e_release = t.e_release;
  validate(p);

  std::optional<Evaluation> best;
  double best_residual = INFINITY;
  double best_any = INFINITY;
  int evaluations = 0;
  for (double boost : t.boost_grid) {
    p.suspend_boost = boost;
    // Iteration-1 share rises with f_suspend; bisect on it.
    double lo = 0.0, hi = 1.0;
    std::optional<Evaluation> closest;
    for (int step = 0; step < t.bisection_steps; ++step) {
      p.f_suspend = 0.5 * (lo + hi);
      auto e = evaluate(t, soil, p, threads);
      ++evaluations;
      if (!closest || std::abs(e.iter1 - t.iter1_mean) < std::abs(closest->iter1 - t.iter1_mean)) closest = e;
      if (e.iter1 < t.iter1_mean) {
        lo = p.f_suspend;
      } else {
        hi = p.f_suspend;
      }
    }
    const double residual = std::abs(closest->iter1 - t.iter1_mean);
    best_any = std::min(best_any, residual);
    if (!feasible(t, *closest)) continue;
    // Inside the tolerance, margin on the pass fraction beats a smaller residual.
    const bool in_tol = residual <= t.residual_tolerance;
    const bool best_in_tol = best && best_residual <= t.residual_tolerance;
    bool better = !best;
    if (best && in_tol && best_in_tol) {
      better = closest->pass > best->pass || (closest->pass == best->pass && closest->cum2 > best->cum2);
    } else if (best) {
      better = in_tol ? true : (!best_in_tol && residual < best_residual);
    }
    if (better) {
      best = closest;
      best_residual = residual;
    }
  }
  if (!best) {
    throw CalibrationError("no parameter set meets the two-iteration cumulative constraint", best_any);
  }
  result.params = best->params;
  result.achieved_iter1 = best->iter1;
  result.achieved_cum2 = best->cum2;
  result.achieved_pass_fraction = best->pass;
  result.achieved_conditional_capture = best->conditional;
  result.residual = best_residual;
  result.evaluations = evaluations;
  return result;
}

MethodProfile to_method_profile(const CalibrationTargets& t, const CalibrationResult& r) {
  MethodProfile m;
  m.method = t.method;
  m.soil = t.soil;
  m.duration_min = t.duration_min;
  m.params = r.params;
  m.calibration = {{"targets", to_json(t)},
                   {"achieved_iter1", r.achieved_iter1},
                   {"achieved_cum2", r.achieved_cum2},
                   {"achieved_pass_fraction", r.achieved_pass_fraction},
                   {"residual", r.residual},
                   {"conditional_capture_bound", r.conditional_capture_bound},
                   {"achieved_conditional_capture", r.achieved_conditional_capture},
                   {"evaluations", r.evaluations}};
  return m;
}

}  // namespace sieve::sim
