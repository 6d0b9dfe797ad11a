#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sieve/model/particle_batch.hpp"
#include "sieve/model/rng.hpp"
#include "sieve/model/sample.hpp"
#include "sieve/sim/params.hpp"

namespace sieve::sim {

using model::ParticleBatch;
using model::SieveId;

// Eggs that left intact cysts through rupture. Released eggs become free
// particles; retained eggs stay locked in the broken shell and leave the
// inventory.
struct RuptureLedger {
  std::uint64_t ruptured_cysts{0};
  std::uint64_t released{0};
  std::uint64_t retained{0};

  bool operator==(const RuptureLedger&) const = default;
};

// Every vessel a particle can be in. The bucket holds the soil between
// iterations; sieve surfaces are keyed by sieve id so contents move with the
// sieve.
struct Workspace {
  ParticleBatch bucket;
  std::map<SieveId, ParticleBatch> sieves;
  ParticleBatch drain;
  ParticleBatch container;
  ParticleBatch counted;  // container contents already reported
  RuptureLedger ledger;

  std::uint64_t initial_particles{0};
  std::uint64_t initial_eggs{0};
  std::uint64_t initial_debris{0};

  static Workspace from_sample(const model::SoilSample& s);
  // Egg-protocol input: cysts already sitting on the #60 sieve.
  static Workspace from_cysts_on(SieveId sieve, const ParticleBatch& cysts);

  ParticleBatch& sieve(SieveId id) { return sieves[id]; }
  std::uint64_t total_particles() const;
  std::uint64_t egg_inventory() const;
  // Fraction of the original soil (debris particles) still in the bucket.
  double residual_fraction() const;
  // Particles and eggs are accounted for exactly, modulo the rupture ledger.
  bool conserved() const;
};

struct Suspension {
  ParticleBatch suspended;
  ParticleBatch sediment;
};

// Each particle independently enters suspension; cysts and eggs with the
// effective suspension probability, debris with its class factor.
Suspension mix_and_settle(const ParticleBatch& sample, const ProcessParams& p, double residual_fraction,
                          StreamRng& rng);

struct DecantResult {
  std::vector<ParticleBatch> on_sieve;  // parallel to the stack, top first
  ParticleBatch drain;
};

// Pure sequential partition through the stack. Throws ConfigError unless the
// stack is ordered by strictly decreasing pore size.
DecantResult decant(const ParticleBatch& suspension, std::span<const model::SieveSpec> stack);

// As above, but each sieve also holds back a binomial share of the material
// that would have passed it.
DecantResult decant(const ParticleBatch& suspension, std::span<const model::SieveSpec> stack, double holdup,
                    StreamRng& rng);

// Moves each sub-pore particle on a sieve to the vessel below with probability
// 1 - (1 - w)^(duration_s / 10). Returns the number moved. Throws DomainError
// for negative durations.
std::uint64_t wash(ParticleBatch& on_sieve, model::Microns pore, ParticleBatch& below, double duration_s,
                   const ProcessParams& p, StreamRng& rng);

double wash_pass_probability(const ProcessParams& p, double duration_s);

struct GrindOutcome {
  std::uint64_t ruptured{0};
  std::uint64_t released{0};
};

// One grind cycle on the mesh: intact cysts rupture with r_rupture, become
// cyst-sized debris, and release Binomial(content, e_release) eggs onto the
// sieve below.
GrindOutcome grind_cycle(ParticleBatch& on_mesh, ParticleBatch& below, const ProcessParams& p, StreamRng& rng,
                         RuptureLedger& ledger);

// Removes a Binomial(n, fraction) share of every bin and returns it.
ParticleBatch thin(ParticleBatch& batch, double fraction, StreamRng& rng);

inline constexpr std::int32_t kReleasedEggDiameterUm = 50;

struct KernelConfig {
  double wash_s{30.0};
  int grind_cycles{3};
  double spray_s{10.0};

  bool operator==(const KernelConfig&) const = default;
};

// Stream coordinates of one iteration. Every kernel step draws from its own
// stream so that adding a step never perturbs earlier draws.
struct IterationStreams {
  std::uint64_t seed{0};
  std::uint64_t replicate{0};
  std::uint64_t sample{0};
  std::uint64_t iteration{0};

  StreamRng stream(std::uint64_t step) const {
    return make_stream(seed, {replicate, sample, iteration, step});
  }
};

namespace step_id {
inline constexpr std::uint64_t kSynthesize = 0;
inline constexpr std::uint64_t kMix = 1;
inline constexpr std::uint64_t kSpill = 2;
inline constexpr std::uint64_t kDecant = 3;
inline constexpr std::uint64_t kWash = 4;
inline constexpr std::uint64_t kTransfer = 5;
inline constexpr std::uint64_t kGrindBase = 100;  // + 2 * cycle
inline constexpr std::uint64_t kSprayBase = 101;  // + 2 * cycle
inline constexpr std::uint64_t kCollect = 1000;
}  // namespace step_id

// Decant-wash-transfer-grind-collect stages shared by the iteration kernel and
// the protocol executor.
void stage_decant(Workspace& ws, const ProcessParams& p, const IterationStreams& s);
void stage_wash(Workspace& ws, SieveId top, SieveId below, double duration_s, const ProcessParams& p,
                StreamRng& rng);
void stage_transfer_loss(Workspace& ws, SieveId moved, const ProcessParams& p, StreamRng& rng);
GrindOutcome stage_grind(Workspace& ws, const ProcessParams& p, StreamRng& rng);
void stage_spray(Workspace& ws, double duration_s, const ProcessParams& p, StreamRng& rng);
std::uint64_t stage_collect(Workspace& ws, const ProcessParams& p, StreamRng& rng);
// Intact cysts and free eggs left on sieves go back to the bucket; all other
// sieve material is rinsed to the drain.
void stage_return_residual(Workspace& ws);

struct IterationResult {
  std::uint64_t eggs{0};
  std::uint64_t cysts_on_60{0};
  GrindOutcome grind;
};

// One full extraction on whatever is in the bucket.
IterationResult run_iteration(Workspace& ws, const ProcessParams& p, const KernelConfig& k,
                              const IterationStreams& s);

}  // namespace sieve::sim
