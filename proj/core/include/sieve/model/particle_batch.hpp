#pragma once

#include <compare>
#include <cstdint>
#include <utility>
#include <vector>
#include <optional>
#include <string>
#include <string_view>

#include "sieve/model/sieve.hpp"

namespace sieve::model {

enum class ParticleClass : std::uint8_t {
  LargeDebris,
  Cyst,
  CystSizedDebris,
  Egg,
  EggSizedDebris,
  Fines,
};

inline constexpr ParticleClass kAllClasses[] = {
    ParticleClass::LargeDebris, ParticleClass::Cyst,           ParticleClass::CystSizedDebris,
    ParticleClass::Egg,         ParticleClass::EggSizedDebris, ParticleClass::Fines,
};

std::string_view to_string(ParticleClass c);
std::optional<ParticleClass> parse_particle_class(std::string_view name);

// Soil mineral and organic matter that is not nematode material.
bool is_debris(ParticleClass c);

// One size bin. egg_content is the per-particle egg load and is only ever
// non-zero for intact cysts.
struct BinKey {
  ParticleClass cls{ParticleClass::Fines};
  std::int32_t diameter_um{1};
  std::int32_t egg_content{0};

  constexpr auto operator<=>(const BinKey&) const = default;
};

// Particle counts by (class, 1 um size bin, egg content), kept as a sorted flat
// vector. Empty bins are never stored, so two batches with the same population
// compare equal.
class ParticleBatch {
 public:
  using Bin = std::pair<BinKey, std::uint64_t>;
  using Bins = std::vector<Bin>;
  using const_iterator = Bins::const_iterator;

  ParticleBatch() = default;

  // Throws DomainError for non-positive diameters, negative egg content or
  // egg content on a non-cyst.
  void add(const BinKey& key, std::uint64_t n);
  // Throws DomainError when the bin holds fewer than n particles.
  void remove(const BinKey& key, std::uint64_t n);
  void clear() { bins_.clear(); }

  std::uint64_t count(const BinKey& key) const;
  std::uint64_t count(ParticleClass c) const;
  std::uint64_t total() const;

  std::uint64_t free_eggs() const { return count(ParticleClass::Egg); }
  std::uint64_t eggs_in_cysts() const;
  // Free eggs plus eggs carried inside intact cysts.
  std::uint64_t egg_inventory() const { return free_eggs() + eggs_in_cysts(); }
  std::uint64_t debris_count() const;

  bool empty() const { return bins_.empty(); }
  std::size_t bin_count() const { return bins_.size(); }
  const_iterator begin() const { return bins_.begin(); }
  const_iterator end() const { return bins_.end(); }

  ParticleBatch& operator+=(const ParticleBatch& other);
  // Throws DomainError if other is not contained in *this.
  ParticleBatch& operator-=(const ParticleBatch& other);
  friend ParticleBatch operator+(ParticleBatch a, const ParticleBatch& b) { return a += b; }

  // Moves every particle of *this into dst and leaves *this empty.
  void drain_into(ParticleBatch& dst);

  template <typename Pred>
  ParticleBatch filter(Pred&& keep) const {
    ParticleBatch out;
    for (const auto& [k, n] : bins_) {
      if (keep(k)) out.bins_.emplace_back(k, n);
    }
    return out;
  }

  bool operator==(const ParticleBatch&) const = default;

 private:
  Bins bins_;
};

struct Partition {
  ParticleBatch passed;
  ParticleBatch trapped;
};

// Routes every bin through one opening with passes_sieve.
Partition partition_batch(const ParticleBatch& batch, Microns pore);

std::string describe(const ParticleBatch& batch);

}  // namespace sieve::model
