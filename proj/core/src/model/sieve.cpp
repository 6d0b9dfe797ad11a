#include "sieve/model/sieve.hpp"

#include <algorithm>

#include "sieve/errors.hpp"

namespace sieve::model {

const std::array<SieveSpec, 4>& standard_sieves() {
  static const std::array<SieveSpec, 4> kSieves{{
      {kMesh20, Microns{850}},
      {kMesh60, Microns{250}},
      {kMesh200, Microns{75}},
      {kMesh500, Microns{25}},
  }};
  return kSieves;
}

const SieveSpec& sieve_for(SieveId id) {
  for (const auto& s : standard_sieves()) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown sieve mesh #" + std::to_string(id.mesh));
}

bool passes_sieve(Microns diameter, Microns pore) {
  if (diameter.value <= 0 || pore.value <= 0) {
    throw DomainError("passes_sieve: diameter and pore must be positive (got " +
                      std::to_string(diameter.value) + ", " + std::to_string(pore.value) + ")");
  }
  return diameter < pore;
}

bool is_ordered_stack(std::span<const SieveSpec> stack) {
  return std::adjacent_find(stack.begin(), stack.end(), [](const auto& upper, const auto& lower) {
           return !(lower.pore < upper.pore);
         }) == stack.end();
}

std::vector<SieveSpec> make_stack(std::span<const SieveId> ids) {
  std::vector<SieveSpec> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(sieve_for(id));
  return out;
}

std::string to_string(SieveId id) { return "#" + std::to_string(id.mesh); }

}  // namespace sieve::model
