#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sieve::model {

// Effective particle diameter or sieve opening, in whole micrometers.
struct Microns {
  std::int32_t value{0};
  constexpr auto operator<=>(const Microns&) const = default;
};

// US standard mesh designation. Doubles as the sieve identity inside the
// machine: a workstation carries one sieve of each mesh.
struct SieveId {
  int mesh{0};
  constexpr auto operator<=>(const SieveId&) const = default;
};

inline constexpr SieveId kMesh20{20};
inline constexpr SieveId kMesh60{60};
inline constexpr SieveId kMesh200{200};
inline constexpr SieveId kMesh500{500};

inline constexpr double kMmPerInch = 25.4;

struct SieveSpec {
  SieveId id;
  Microns pore;
  double diameter_mm{6.0 * kMmPerInch};

  bool operator==(const SieveSpec&) const = default;
};

// #20, #60, #200, #500 in decreasing pore order.
const std::array<SieveSpec, 4>& standard_sieves();

// Throws ConfigError for a mesh outside the standard set.
const SieveSpec& sieve_for(SieveId id);

// True iff the particle slips through the opening. A particle whose diameter
// equals the opening is trapped.
bool passes_sieve(Microns diameter, Microns pore);

// Ordered strictly by decreasing pore size.
bool is_ordered_stack(std::span<const SieveSpec> stack);

std::vector<SieveSpec> make_stack(std::span<const SieveId> ids);

std::string to_string(SieveId id);

}  // namespace sieve::model
