#include "sieve/model/particle_batch.hpp"

#include <algorithm>
#include <sstream>

#include "sieve/errors.hpp"

namespace sieve::model {

std::string_view to_string(ParticleClass c) {
  switch (c) {
    case ParticleClass::LargeDebris: return "LargeDebris";
    case ParticleClass::Cyst: return "Cyst";
    case ParticleClass::CystSizedDebris: return "CystSizedDebris";
    case ParticleClass::Egg: return "Egg";
    case ParticleClass::EggSizedDebris: return "EggSizedDebris";
    case ParticleClass::Fines: return "Fines";
  }
  return "?";
}

std::optional<ParticleClass> parse_particle_class(std::string_view name) {
  for (auto c : kAllClasses) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

bool is_debris(ParticleClass c) {
  return c != ParticleClass::Cyst && c != ParticleClass::Egg;
}

namespace {

bool key_less(const ParticleBatch::Bin& b, const BinKey& k) { return b.first < k; }

}  // namespace

void ParticleBatch::add(const BinKey& key, std::uint64_t n) {
  if (key.diameter_um <= 0) throw DomainError("particle diameter must be positive");
  if (key.egg_content < 0) throw DomainError("egg content must be non-negative");
  if (key.egg_content != 0 && key.cls != ParticleClass::Cyst) {
    throw DomainError("only cysts carry eggs");
  }
  if (n == 0) return;
  // Callers mostly add in key order.
  if (bins_.empty() || bins_.back().first < key) {
    bins_.emplace_back(key, n);
    return;
  }
  auto it = std::lower_bound(bins_.begin(), bins_.end(), key, key_less);
  if (it != bins_.end() && it->first == key) {
    it->second += n;
  } else {
    bins_.emplace(it, key, n);
  }
}

void ParticleBatch::remove(const BinKey& key, std::uint64_t n) {
  if (n == 0) return;
  auto it = std::lower_bound(bins_.begin(), bins_.end(), key, key_less);
  if (it == bins_.end() || it->first != key || it->second < n) {
    throw DomainError("remove: bin holds fewer particles than requested");
  }
  it->second -= n;
  if (it->second == 0) bins_.erase(it);
}

std::uint64_t ParticleBatch::count(const BinKey& key) const {
  auto it = std::lower_bound(bins_.begin(), bins_.end(), key, key_less);
  return it == bins_.end() || it->first != key ? 0 : it->second;
}

std::uint64_t ParticleBatch::count(ParticleClass c) const {
  std::uint64_t sum = 0;
  for (const auto& [k, n] : bins_) {
    if (k.cls == c) sum += n;
  }
  return sum;
}

std::uint64_t ParticleBatch::total() const {
  std::uint64_t sum = 0;
  for (const auto& [k, n] : bins_) sum += n;
  return sum;
}

std::uint64_t ParticleBatch::eggs_in_cysts() const {
  std::uint64_t sum = 0;
  for (const auto& [k, n] : bins_) {
    if (k.cls == ParticleClass::Cyst) sum += n * static_cast<std::uint64_t>(k.egg_content);
  }
  return sum;
}

std::uint64_t ParticleBatch::debris_count() const {
  std::uint64_t sum = 0;
  for (const auto& [k, n] : bins_) {
    if (is_debris(k.cls)) sum += n;
  }
  return sum;
}

ParticleBatch& ParticleBatch::operator+=(const ParticleBatch& other) {
  if (other.bins_.empty()) return *this;
  if (bins_.empty()) {
    bins_ = other.bins_;
    return *this;
  }
  Bins merged;
  merged.reserve(bins_.size() + other.bins_.size());
  auto a = bins_.begin();
  auto b = other.bins_.begin();
  while (a != bins_.end() && b != other.bins_.end()) {
    if (a->first < b->first) {
      merged.push_back(*a++);
    } else if (b->first < a->first) {
      merged.push_back(*b++);
    } else {
      merged.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  merged.insert(merged.end(), a, bins_.end());
  merged.insert(merged.end(), b, other.bins_.end());
  bins_ = std::move(merged);
  return *this;
}

ParticleBatch& ParticleBatch::operator-=(const ParticleBatch& other) {
  if (other.bins_.empty()) return *this;
  Bins out;
  out.reserve(bins_.size());
  auto a = bins_.begin();
  auto b = other.bins_.begin();
  while (b != other.bins_.end()) {
    while (a != bins_.end() && a->first < b->first) out.push_back(*a++);
    if (a == bins_.end() || b->first < a->first || a->second < b->second) {
      throw DomainError("subtraction would produce a negative count");
    }
    if (a->second > b->second) out.emplace_back(a->first, a->second - b->second);
    ++a;
    ++b;
  }
  out.insert(out.end(), a, bins_.end());
  bins_ = std::move(out);
  return *this;
}

void ParticleBatch::drain_into(ParticleBatch& dst) {
  if (&dst == this) return;
  if (dst.bins_.empty()) {
    dst.bins_.swap(bins_);
    return;
  }
  dst += *this;
  bins_.clear();
}

Partition partition_batch(const ParticleBatch& batch, Microns pore) {
  Partition out;
  for (const auto& [k, n] : batch) {
    auto& side = passes_sieve(Microns{k.diameter_um}, pore) ? out.passed : out.trapped;
    side.add(k, n);
  }
  return out;
}

std::string describe(const ParticleBatch& batch) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (auto c : kAllClasses) {
    const auto n = batch.count(c);
    if (n == 0) continue;
    os << (first ? "" : ", ") << to_string(c) << ":" << n;
    first = false;
  }
  os << "}";
  return os.str();
}

}  // namespace sieve::model
