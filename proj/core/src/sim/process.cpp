#include "sieve/sim/process.hpp"

#include <array>
#include <cmath>
#include <random>

#include "sieve/errors.hpp"

namespace sieve::sim {

using model::BinKey;
using model::ParticleClass;

namespace {

std::uint64_t binomial(std::uint64_t n, double p, StreamRng& rng) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  return std::binomial_distribution<std::uint64_t>(n, p)(rng);
}

const std::array<model::SieveSpec, 2>& cyst_stack() {
  static const std::array<model::SieveSpec, 2> kStack{model::sieve_for(model::kMesh20),
                                                      model::sieve_for(model::kMesh60)};
  return kStack;
}

}  // namespace

Workspace Workspace::from_sample(const model::SoilSample& s) {
  Workspace ws;
  ws.bucket = s.batch;
  ws.initial_particles = s.batch.total();
  ws.initial_eggs = s.batch.egg_inventory();
  ws.initial_debris = s.batch.debris_count();
  return ws;
}

Workspace Workspace::from_cysts_on(SieveId sieve, const ParticleBatch& cysts) {
  Workspace ws;
  ws.sieves[sieve] = cysts;
  ws.initial_particles = cysts.total();
  ws.initial_eggs = cysts.egg_inventory();
  return ws;
}

std::uint64_t Workspace::total_particles() const {
  std::uint64_t n = bucket.total() + drain.total() + container.total() + counted.total();
  for (const auto& [id, b] : sieves) n += b.total();
  return n;
}

std::uint64_t Workspace::egg_inventory() const {
  std::uint64_t n = bucket.egg_inventory() + drain.egg_inventory() + container.egg_inventory() +
                    counted.egg_inventory();
  for (const auto& [id, b] : sieves) n += b.egg_inventory();
  return n;
}

double Workspace::residual_fraction() const {
  if (initial_debris == 0) return 1.0;
  return static_cast<double>(bucket.debris_count()) / static_cast<double>(initial_debris);
}

bool Workspace::conserved() const {
  return total_particles() - ledger.released == initial_particles &&
         egg_inventory() + ledger.retained == initial_eggs;
}

ParticleBatch thin(ParticleBatch& batch, double fraction, StreamRng& rng) {
  ParticleBatch taken;
  if (fraction <= 0.0) return taken;
  for (const auto& [k, n] : batch) taken.add(k, binomial(n, fraction, rng));
  batch -= taken;
  return taken;
}

Suspension mix_and_settle(const ParticleBatch& sample, const ProcessParams& p, double residual_fraction,
                          StreamRng& rng) {
  Suspension out;
  for (const auto& [k, n] : sample) {
    const auto up = binomial(n, suspend_probability(p, k.cls, residual_fraction), rng);
    out.suspended.add(k, up);
    out.sediment.add(k, n - up);
  }
  return out;
}

DecantResult decant(const ParticleBatch& suspension, std::span<const model::SieveSpec> stack) {
  if (!model::is_ordered_stack(stack)) throw ConfigError("decant stack must be ordered by decreasing pore size");
  DecantResult out;
  ParticleBatch current = suspension;
  for (const auto& sieve : stack) {
    auto split = model::partition_batch(current, sieve.pore);
    out.on_sieve.push_back(std::move(split.trapped));
    current = std::move(split.passed);
  }
  out.drain = std::move(current);
  return out;
}

DecantResult decant(const ParticleBatch& suspension, std::span<const model::SieveSpec> stack, double holdup,
                    StreamRng& rng) {
  if (!model::is_ordered_stack(stack)) throw ConfigError("decant stack must be ordered by decreasing pore size");
  DecantResult out;
  ParticleBatch current = suspension;
  for (const auto& sieve : stack) {
    auto split = model::partition_batch(current, sieve.pore);
    split.trapped += thin(split.passed, holdup, rng);
    out.on_sieve.push_back(std::move(split.trapped));
    current = std::move(split.passed);
  }
  out.drain = std::move(current);
  return out;
}

double wash_pass_probability(const ProcessParams& p, double duration_s) {
  if (duration_s < 0.0) throw DomainError("wash duration must be >= 0");
  if (duration_s == 0.0) return 0.0;
  return 1.0 - std::pow(1.0 - p.w_transfer, duration_s / 10.0);
}

std::uint64_t wash(ParticleBatch& on_sieve, model::Microns pore, ParticleBatch& below, double duration_s,
                   const ProcessParams& p, StreamRng& rng) {
  const double pass = wash_pass_probability(p, duration_s);
  if (pass == 0.0) return 0;
  ParticleBatch moved;
  for (const auto& [k, n] : on_sieve) {
    if (!model::passes_sieve(model::Microns{k.diameter_um}, pore)) continue;
    moved.add(k, binomial(n, pass, rng));
  }
  on_sieve -= moved;
  const auto count = moved.total();
  below += moved;
  return count;
}

GrindOutcome grind_cycle(ParticleBatch& on_mesh, ParticleBatch& below, const ProcessParams& p, StreamRng& rng,
                         RuptureLedger& ledger) {
  GrindOutcome out;
  ParticleBatch broken;
  for (const auto& [k, n] : on_mesh) {
    if (k.cls != ParticleClass::Cyst) continue;
    const auto ruptured = binomial(n, p.r_rupture, rng);
    if (ruptured == 0) continue;
    broken.add(k, ruptured);
    // Eggs of k cysts released independently: Binomial(k * content, e).
    const auto load = ruptured * static_cast<std::uint64_t>(k.egg_content);
    const auto released = binomial(load, p.e_release, rng);
    out.ruptured += ruptured;
    out.released += released;
    ledger.retained += load - released;
  }
  on_mesh -= broken;
  for (const auto& [k, n] : broken) on_mesh.add({ParticleClass::CystSizedDebris, k.diameter_um, 0}, n);
  below.add({ParticleClass::Egg, kReleasedEggDiameterUm, 0}, out.released);
  ledger.ruptured_cysts += out.ruptured;
  ledger.released += out.released;
  return out;
}

void stage_decant(Workspace& ws, const ProcessParams& p, const IterationStreams& s) {
  auto mix_rng = s.stream(step_id::kMix);
  auto mixed = mix_and_settle(ws.bucket, p, ws.residual_fraction(), mix_rng);
  ws.bucket = std::move(mixed.sediment);
  auto spill_rng = s.stream(step_id::kSpill);
  ws.drain += thin(mixed.suspended, p.losses.decant_spill, spill_rng);
  auto decant_rng = s.stream(step_id::kDecant);
  auto out = decant(mixed.suspended, cyst_stack(), p.decant_holdup, decant_rng);
  ws.sieve(model::kMesh20) += out.on_sieve[0];
  ws.sieve(model::kMesh60) += out.on_sieve[1];
  ws.drain += out.drain;
}

void stage_wash(Workspace& ws, SieveId top, SieveId below, double duration_s, const ProcessParams& p,
                StreamRng& rng) {
  wash(ws.sieve(top), model::sieve_for(top).pore, ws.sieve(below), duration_s, p, rng);
}

void stage_transfer_loss(Workspace& ws, SieveId moved, const ProcessParams& p, StreamRng& rng) {
  ws.drain += thin(ws.sieve(moved), p.losses.transfer, rng);
}

GrindOutcome stage_grind(Workspace& ws, const ProcessParams& p, StreamRng& rng) {
  return grind_cycle(ws.sieve(model::kMesh60), ws.sieve(model::kMesh200), p, rng, ws.ledger);
}

void stage_spray(Workspace& ws, double duration_s, const ProcessParams& p, StreamRng& rng) {
  // Bottom-up so a particle descends at most one level per spray.
  wash(ws.sieve(model::kMesh500), model::sieve_for(model::kMesh500).pore, ws.drain, duration_s, p, rng);
  stage_wash(ws, model::kMesh200, model::kMesh500, duration_s, p, rng);
  stage_wash(ws, model::kMesh60, model::kMesh200, duration_s, p, rng);
}

std::uint64_t stage_collect(Workspace& ws, const ProcessParams& p, StreamRng& rng) {
  auto& out = ws.sieve(model::kMesh500);
  ws.drain += thin(out, p.losses.collect, rng);
  out.drain_into(ws.container);
  const auto eggs = ws.container.free_eggs();
  ws.container.drain_into(ws.counted);
  return eggs;
}

void stage_return_residual(Workspace& ws) {
  for (auto& [id, b] : ws.sieves) {
    auto back = b.filter([](const BinKey& k) { return k.cls == ParticleClass::Cyst || k.cls == ParticleClass::Egg; });
    b -= back;
    ws.bucket += back;
    b.drain_into(ws.drain);
  }
}

IterationResult run_iteration(Workspace& ws, const ProcessParams& p, const KernelConfig& k,
                              const IterationStreams& s) {
  IterationResult r;
  if (k.grind_cycles < 0) throw DomainError("grind cycles must be >= 0");
  stage_decant(ws, p, s);
  auto wash_rng = s.stream(step_id::kWash);
  stage_wash(ws, model::kMesh20, model::kMesh60, k.wash_s, p, wash_rng);
  auto transfer_rng = s.stream(step_id::kTransfer);
  stage_transfer_loss(ws, model::kMesh60, p, transfer_rng);
  r.cysts_on_60 = ws.sieve(model::kMesh60).count(ParticleClass::Cyst);
  for (int c = 0; c < k.grind_cycles; ++c) {
    auto grind_rng = s.stream(step_id::kGrindBase + 2 * static_cast<std::uint64_t>(c));
    const auto g = stage_grind(ws, p, grind_rng);
    r.grind.ruptured += g.ruptured;
    r.grind.released += g.released;
    auto spray_rng = s.stream(step_id::kSprayBase + 2 * static_cast<std::uint64_t>(c));
    stage_spray(ws, k.spray_s, p, spray_rng);
  }
  auto collect_rng = s.stream(step_id::kCollect);
  r.eggs = stage_collect(ws, p, collect_rng);
  stage_return_residual(ws);
  return r;
}

}  // namespace sieve::sim
