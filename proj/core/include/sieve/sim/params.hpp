#pragma once

#include <map>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "sieve/model/particle_batch.hpp"

namespace sieve::sim {

struct StrayLosses {
  double decant_spill{0.01};  // suspension lost over the rim while pouring
  double transfer{0.005};     // sieve contents lost per gripper transfer
  double collect{0.01};       // output lost moving #500 contents to the container

  bool operator==(const StrayLosses&) const = default;
};

// Free parameters of the process kernel. Every field is a probability.
struct ProcessParams {
  // Chance a cyst or free egg is in suspension when the bucket is decanted.
  double f_suspend{0.7};
  // How strongly a depleted bucket re-suspends; the effective suspension
  // fraction is f + (1 - f) * boost * (1 - residual soil fraction).
  double suspend_boost{1.0};
  // Per 10 s of spray, chance a sub-pore particle moves down one sieve.
  double w_transfer{0.829};
  // Per grind cycle, chance an intact cyst on the mesh ruptures.
  double r_rupture{0.689};
  // Chance each egg of a ruptured cyst dislodges.
  double e_release{0.9};
  // Fraction of sub-pore material that hangs up on a sieve while decanting.
  double decant_holdup{0.3};
  std::map<model::ParticleClass, double> debris_suspend{
      {model::ParticleClass::LargeDebris, 0.05},
      {model::ParticleClass::CystSizedDebris, 0.6},
      {model::ParticleClass::EggSizedDebris, 0.85},
      {model::ParticleClass::Fines, 0.95},
  };
  StrayLosses losses;

  bool operator==(const ProcessParams&) const = default;
};

// Throws ConfigError when any probability lies outside [0, 1].
void validate(const ProcessParams& p);

// Perfect suspension, transfer, rupture and release with no stray losses.
ProcessParams lossless_params();

// Suspension probability for cysts and free eggs given the fraction of the
// original soil still in the bucket.
double effective_suspend(const ProcessParams& p, double residual_fraction);

double suspend_probability(const ProcessParams& p, model::ParticleClass c, double residual_fraction);

nlohmann::json to_json(const ProcessParams& p);
ProcessParams params_from_json(const nlohmann::json& j);

// A parameter file: one extraction method on one soil, plus provenance of the
// calibration that produced it.
struct MethodProfile {
  std::string method{"robotic"};  // robotic | manual
  std::string soil;
  std::pair<double, double> duration_min{2.3, 2.3};
  ProcessParams params;
  nlohmann::json calibration = nlohmann::json::object();
};

MethodProfile method_profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MethodProfile& m);
MethodProfile load_method_profile(const std::string& path);

}  // namespace sieve::sim
