#include "sieve/sim/params.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sieve/errors.hpp"

namespace sieve::sim {

using model::ParticleClass;

namespace {

void check_probability(double v, const std::string& name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("parameter " + name + " must lie in [0, 1]");
}

}  // namespace

void validate(const ProcessParams& p) {
  check_probability(p.f_suspend, "f_suspend");
  check_probability(p.suspend_boost, "suspend_boost");
  check_probability(p.w_transfer, "w_transfer");
  check_probability(p.r_rupture, "r_rupture");
  check_probability(p.e_release, "e_release");
  check_probability(p.decant_holdup, "decant_holdup");
  check_probability(p.losses.decant_spill, "losses.decant_spill");
  check_probability(p.losses.transfer, "losses.transfer");
  check_probability(p.losses.collect, "losses.collect");
  for (const auto& [c, v] : p.debris_suspend) {
    if (!model::is_debris(c)) throw ConfigError("debris_suspend only applies to debris classes");
    check_probability(v, "debris_suspend." + std::string(model::to_string(c)));
  }
}

ProcessParams lossless_params() {
  ProcessParams p;
  p.f_suspend = 1.0;
  p.suspend_boost = 1.0;
  p.w_transfer = 1.0;
  p.r_rupture = 1.0;
  p.e_release = 1.0;
  p.losses = {0.0, 0.0, 0.0};
  return p;
}

double effective_suspend(const ProcessParams& p, double residual_fraction) {
  const double depleted = 1.0 - std::clamp(residual_fraction, 0.0, 1.0);
  return std::clamp(p.f_suspend + (1.0 - p.f_suspend) * p.suspend_boost * depleted, 0.0, 1.0);
}

double suspend_probability(const ProcessParams& p, ParticleClass c, double residual_fraction) {
  if (!model::is_debris(c)) return effective_suspend(p, residual_fraction);
  auto it = p.debris_suspend.find(c);
  return it == p.debris_suspend.end() ? 0.0 : it->second;
}

nlohmann::json to_json(const ProcessParams& p) {
  nlohmann::json debris = nlohmann::json::object();
  for (const auto& [c, v] : p.debris_suspend) debris[std::string(model::to_string(c))] = v;
  return {{"f_suspend", p.f_suspend},
          {"suspend_boost", p.suspend_boost},
          {"w_transfer", p.w_transfer},
          {"r_rupture", p.r_rupture},
          {"e_release", p.e_release},
          {"decant_holdup", p.decant_holdup},
          {"debris_suspend", debris},
          {"losses",
           {{"decant_spill", p.losses.decant_spill},
            {"transfer", p.losses.transfer},
            {"collect", p.losses.collect}}}};
}

ProcessParams params_from_json(const nlohmann::json& j) {
  ProcessParams p;
  try {
    p.f_suspend = j.value("f_suspend", p.f_suspend);
    p.suspend_boost = j.value("suspend_boost", p.suspend_boost);
    p.w_transfer = j.value("w_transfer", p.w_transfer);
    p.r_rupture = j.value("r_rupture", p.r_rupture);
    p.e_release = j.value("e_release", p.e_release);
    p.decant_holdup = j.value("decant_holdup", p.decant_holdup);
    if (j.contains("debris_suspend")) {
      for (const auto& [name, v] : j.at("debris_suspend").items()) {
        auto c = model::parse_particle_class(name);
        if (!c) throw ConfigError("unknown particle class '" + name + "' in debris_suspend");
        p.debris_suspend[*c] = v.get<double>();
      }
    }
    if (j.contains("losses")) {
      const auto& l = j.at("losses");
      p.losses.decant_spill = l.value("decant_spill", p.losses.decant_spill);
      p.losses.transfer = l.value("transfer", p.losses.transfer);
      p.losses.collect = l.value("collect", p.losses.collect);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("process params: ") + e.what());
  }
  validate(p);
  return p;
}

MethodProfile method_profile_from_json(const nlohmann::json& j) {
  MethodProfile m;
  try {
    m.method = j.value("method", m.method);
    if (m.method != "robotic" && m.method != "manual") {
      throw ConfigError("method must be 'robotic' or 'manual'");
    }
    m.soil = j.value("soil", std::string{});
    if (j.contains("duration_min")) {
      const auto& d = j.at("duration_min");
      m.duration_min = {d.at(0).get<double>(), d.at(1).get<double>()};
    }
    m.params = params_from_json(j.contains("params") ? j.at("params") : j);
    if (j.contains("calibration")) m.calibration = j.at("calibration");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("parameter file: ") + e.what());
  }
  return m;
}

nlohmann::json to_json(const MethodProfile& m) {
  return {{"method", m.method},
          {"soil", m.soil},
          {"duration_min", {m.duration_min.first, m.duration_min.second}},
          {"params", to_json(m.params)},
          {"calibration", m.calibration}};
}

MethodProfile load_method_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file '" + path + "'");
  try {
    return method_profile_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("parameter file '" + path + "': " + e.what());
  }
}

}  // namespace sieve::sim
