#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sieve/model/particle_batch.hpp"
#include "sieve/model/rng.hpp"

namespace sieve::model {

struct SizeRange {
  std::int32_t min_um{1};
  std::int32_t max_um{1};
  bool operator==(const SizeRange&) const = default;
};

// Class size windows implied by which sieve traps each class. Upper ends sit
// one micrometer below the opening the class must pass.
SizeRange default_size_range(ParticleClass c);

struct CountDistribution {
  enum class Kind { Constant, Poisson };
  Kind kind{Kind::Constant};
  double mean{0.0};
  bool operator==(const CountDistribution&) const = default;
};

// Truncated negative binomial by default (mean 200, support 0..400).
struct EggContentDistribution {
  enum class Kind { Constant, NegativeBinomial };
  Kind kind{Kind::NegativeBinomial};
  double mean{200.0};
  double dispersion{8.0};
  std::int32_t min{0};
  std::int32_t max{400};
  bool operator==(const EggContentDistribution&) const = default;
};

struct ClassProfile {
  CountDistribution count;
  SizeRange size;
  bool operator==(const ClassProfile&) const = default;
};

struct SampleProfile {
  std::string label{"synthetic"};
  double volume_cc{100.0};
  std::map<ParticleClass, ClassProfile> classes;
  EggContentDistribution egg_content;

  bool operator==(const SampleProfile&) const = default;
};

struct SoilSample {
  double volume_cc{100.0};
  ParticleBatch batch;
  std::string origin_label;
};

// Throws ConfigError on empty or inverted ranges, negative means, ranges
// outside the class window or a non-positive volume.
void validate(const SampleProfile& profile);

SampleProfile profile_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SampleProfile& profile);
SampleProfile load_profile(const std::string& path);

// Deterministic for a fixed seed.
SoilSample synthesize_sample(const SampleProfile& profile, std::uint64_t seed);
SoilSample synthesize_sample(const SampleProfile& profile, StreamRng& rng);

std::int32_t draw_egg_content(const EggContentDistribution& dist, StreamRng& rng);

enum class VesselRole { SieveSurface, Bucket, SuspensionColumn, CollectionContainer, Drain };

struct Vessel {
  VesselRole role{VesselRole::Bucket};
  std::optional<SieveId> sieve;  // set only for SieveSurface
  ParticleBatch contents;
};

}  // namespace sieve::model
