#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

namespace sieve::protocol {

// Per-step time allocations. Only the wash, grind, spray, mix and settle
// durations are fixed by the method; motion allocations absorb the rest of
// each protocol's total and are configuration, not code.
struct CystTiming {
  std::int64_t decant_ms{0};
  std::int64_t rotate_ms{0};
  std::int64_t compress_ms{0};
  double wash_s{0.0};
  std::int64_t uncompress_ms{0};
  std::int64_t sprayer_retract_ms{0};
  std::int64_t transfer_ms{0};

  bool operator==(const CystTiming&) const = default;
};

struct EggTiming {
  std::int64_t rotate_ms{0};
  std::int64_t compress_ms{0};
  std::int64_t lower_ms{0};      // clear height to hover
  std::int64_t spin_on_ms{0};
  std::int64_t contact_ms{0};    // hover to contact, once per cycle
  double grind_s{0.0};
  std::int64_t lift_ms{0};       // contact to hover, once per cycle
  double spray_s{0.0};
  std::int64_t spin_off_ms{0};
  std::int64_t raise_ms{0};      // hover to clear height
  std::int64_t collect_ms{0};
  int cycles{0};

  bool operator==(const EggTiming&) const = default;
};

struct PrepTiming {
  double mix_s{0.0};
  double settle_s{0.0};

  bool operator==(const PrepTiming&) const = default;
};

struct TimingConfig {
  CystTiming cyst;
  EggTiming egg;
  PrepTiming prep;

  bool operator==(const TimingConfig&) const = default;
};

// Every allocation is required; a missing or negative one is a ConfigError.
TimingConfig timing_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TimingConfig& t);

}  // namespace sieve::protocol
