#include "sieve/model/sample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "sieve/errors.hpp"

namespace sieve::model {

using nlohmann::json;

SizeRange default_size_range(ParticleClass c) {
  switch (c) {
    case ParticleClass::LargeDebris: return {851, 3000};
    case ParticleClass::Cyst:
    case ParticleClass::CystSizedDebris: return {251, 849};
    case ParticleClass::Egg:
    case ParticleClass::EggSizedDebris: return {26, 74};
    case ParticleClass::Fines: return {1, 24};
  }
  return {1, 1};
}

void validate(const SampleProfile& p) {
  if (!(p.volume_cc > 0.0)) throw ConfigError("profile volume_cc must be positive");
  for (const auto& [cls, cp] : p.classes) {
    const auto name = std::string(to_string(cls));
    if (!(cp.count.mean >= 0.0) || !std::isfinite(cp.count.mean)) {
      throw ConfigError("profile class " + name + ": count mean must be a finite value >= 0");
    }
    if (cp.size.min_um <= 0 || cp.size.max_um < cp.size.min_um) {
      throw ConfigError("profile class " + name + ": empty or inverted size range");
    }
    const auto window = default_size_range(cls);
    if (cp.size.min_um < window.min_um || cp.size.max_um > window.max_um) {
      throw ConfigError("profile class " + name + ": size range outside [" +
                        std::to_string(window.min_um) + ", " + std::to_string(window.max_um) + "] um");
    }
  }
  const auto& e = p.egg_content;
  if (!(e.mean >= 0.0) || !std::isfinite(e.mean)) throw ConfigError("egg_content mean must be >= 0");
  if (e.min < 0 || e.max < e.min) throw ConfigError("egg_content range empty or negative");
  if (e.kind == EggContentDistribution::Kind::NegativeBinomial && !(e.dispersion > 0.0)) {
    throw ConfigError("egg_content dispersion must be positive");
  }
}

namespace {

CountDistribution count_from_json(const json& j, const std::string& cls) {
  CountDistribution d;
  if (j.is_number()) {
    d.mean = j.get<double>();
    return d;
  }
  const auto kind = j.value("dist", std::string{"constant"});
  if (kind == "constant") {
    d.kind = CountDistribution::Kind::Constant;
  } else if (kind == "poisson") {
    d.kind = CountDistribution::Kind::Poisson;
  } else {
    throw ConfigError("class " + cls + ": unknown count dist '" + kind + "'");
  }
  if (!j.contains("mean")) throw ConfigError("class " + cls + ": count needs a mean");
  d.mean = j.at("mean").get<double>();
  return d;
}

}  // namespace

SampleProfile profile_from_json(const json& doc) {
  SampleProfile p;
  try {
    p.label = doc.value("label", p.label);
    p.volume_cc = doc.value("volume_cc", p.volume_cc);
    if (doc.contains("classes")) {
      for (const auto& [name, cj] : doc.at("classes").items()) {
        auto cls = parse_particle_class(name);
        if (!cls) throw ConfigError("unknown particle class '" + name + "'");
        ClassProfile cp;
        cp.size = default_size_range(*cls);
        cp.count = count_from_json(cj.at("count"), name);
        if (cj.contains("size_um")) {
          const auto& r = cj.at("size_um");
          if (!r.is_array() || r.size() != 2) throw ConfigError("class " + name + ": size_um must be [min, max]");
          cp.size = {r[0].get<std::int32_t>(), r[1].get<std::int32_t>()};
        }
        p.classes[*cls] = cp;
      }
    }
    if (doc.contains("egg_content")) {
      const auto& ej = doc.at("egg_content");
      auto& e = p.egg_content;
      const auto kind = ej.value("dist", std::string{"negative_binomial"});
      if (kind == "constant") {
        e.kind = EggContentDistribution::Kind::Constant;
      } else if (kind == "negative_binomial") {
        e.kind = EggContentDistribution::Kind::NegativeBinomial;
      } else {
        throw ConfigError("unknown egg_content dist '" + kind + "'");
      }
      e.mean = ej.value("mean", e.mean);
      e.dispersion = ej.value("dispersion", e.dispersion);
      e.min = ej.value("min", e.min);
      e.max = ej.value("max", e.max);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("sample profile: ") + ex.what());
  }
  validate(p);
  return p;
}

json to_json(const SampleProfile& p) {
  json classes = json::object();
  for (const auto& [cls, cp] : p.classes) {
    json count = {{"dist", cp.count.kind == CountDistribution::Kind::Poisson ? "poisson" : "constant"},
                  {"mean", cp.count.mean}};
    classes[std::string(to_string(cls))] = {{"count", count},
                                            {"size_um", {cp.size.min_um, cp.size.max_um}}};
  }
  const auto& e = p.egg_content;
  return {{"label", p.label},
          {"volume_cc", p.volume_cc},
          {"classes", classes},
          {"egg_content",
           {{"dist", e.kind == EggContentDistribution::Kind::Constant ? "constant" : "negative_binomial"},
            {"mean", e.mean},
            {"dispersion", e.dispersion},
            {"min", e.min},
            {"max", e.max}}}};
}

SampleProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sample profile '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError("sample profile '" + path + "': " + ex.what());
  }
  return profile_from_json(doc);
}

std::int32_t draw_egg_content(const EggContentDistribution& d, StreamRng& rng) {
  if (d.kind == EggContentDistribution::Kind::Constant) {
    return std::clamp(static_cast<std::int32_t>(std::lround(d.mean)), d.min, d.max);
  }
  if (d.mean <= 0.0) return std::max<std::int32_t>(0, d.min);
  // Parameterised by mean and integer dispersion k: p = k / (k + mean).
  const int k = std::max(1, static_cast<int>(std::lround(d.dispersion)));
  std::negative_binomial_distribution<std::int32_t> nb(k, k / (k + d.mean));
  // Truncation by rejection; clamp only if the window is pathological.
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto v = nb(rng);
    if (v >= d.min && v <= d.max) return v;
  }
  return std::clamp(nb(rng), d.min, d.max);
}

SoilSample synthesize_sample(const SampleProfile& profile, StreamRng& rng) {
  validate(profile);
  SoilSample s;
  s.volume_cc = profile.volume_cc;
  s.origin_label = profile.label;
  for (const auto& [cls, cp] : profile.classes) {
    std::uint64_t n = 0;
    if (cp.count.kind == CountDistribution::Kind::Poisson) {
      if (cp.count.mean > 0.0) n = std::poisson_distribution<std::uint64_t>(cp.count.mean)(rng);
    } else {
      n = static_cast<std::uint64_t>(std::llround(cp.count.mean));
    }
    const auto width = static_cast<std::uint64_t>(cp.size.max_um - cp.size.min_um) + 1;
    if (cls != ParticleClass::Cyst && n > width) {
      // Uniform sizes as a multinomial over the bins, one conditional binomial per bin.
      std::uint64_t remaining = n;
      for (std::uint64_t i = 0; i < width && remaining > 0; ++i) {
        const auto left = width - i;
        const auto k = left == 1 ? remaining
                                 : std::binomial_distribution<std::uint64_t>(
                                       remaining, 1.0 / static_cast<double>(left))(rng);
        s.batch.add({cls, cp.size.min_um + static_cast<std::int32_t>(i), 0}, k);
        remaining -= k;
      }
      continue;
    }
    std::uniform_int_distribution<std::int32_t> size(cp.size.min_um, cp.size.max_um);
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto d = size(rng);
      const auto eggs = cls == ParticleClass::Cyst ? draw_egg_content(profile.egg_content, rng) : 0;
      s.batch.add({cls, d, eggs}, 1);
    }
  }
  return s;
}

SoilSample synthesize_sample(const SampleProfile& profile, std::uint64_t seed) {
  auto rng = make_stream(seed, {0x5a3d});
  return synthesize_sample(profile, rng);
}

}  // namespace sieve::model
