#include <gtest/gtest.h>

#include <cmath>

#include "sieve/errors.hpp"
#include "sieve/model/sieve.hpp"
#include "sieve/sim/params.hpp"
#include "sieve/sim/process.hpp"
#include "test_support.hpp"

using namespace sieve;
using namespace sieve::sim;
using model::BinKey;
using model::ParticleClass;

namespace {

BinKey cyst(int d = 400, int eggs = 100) { return {ParticleClass::Cyst, d, eggs}; }
BinKey egg(int d = 50) { return {ParticleClass::Egg, d, 0}; }

// Binomial mean within k standard deviations.
void expect_binomial(std::uint64_t hits, std::uint64_t n, double p, double k = 5.0) {
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  EXPECT_NEAR(static_cast<double>(hits), mean, k * sd + 1e-9) << "n=" << n << " p=" << p;
}

}  // namespace

TEST(Params, DefaultsAndLosslessValidate) {
  EXPECT_NO_THROW(validate(ProcessParams{}));
  const auto l = lossless_params();
  EXPECT_NO_THROW(validate(l));
  EXPECT_EQ(l.f_suspend, 1.0);
  EXPECT_EQ(l.w_transfer, 1.0);
  EXPECT_EQ(l.r_rupture, 1.0);
  EXPECT_EQ(l.e_release, 1.0);
  EXPECT_EQ(l.losses.decant_spill + l.losses.transfer + l.losses.collect, 0.0);
}

TEST(Params, OutOfRangeRejected) {
  auto p = ProcessParams{};
  p.r_rupture = 1.2;
  EXPECT_THROW(validate(p), ConfigError);
  p = {};
  p.losses.collect = -0.1;
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(Params, JsonRoundTrip) {
  auto p = ProcessParams{};
  p.f_suspend = 0.42;
  p.debris_suspend[ParticleClass::Fines] = 0.5;
  EXPECT_EQ(params_from_json(to_json(p)), p);
}

TEST(Params, EffectiveSuspendFollowsResidual) {
  ProcessParams p;
  p.f_suspend = 0.6;
  p.suspend_boost = 0.5;
  EXPECT_DOUBLE_EQ(effective_suspend(p, 1.0), 0.6);
  EXPECT_DOUBLE_EQ(effective_suspend(p, 0.0), 0.6 + 0.4 * 0.5);
  EXPECT_DOUBLE_EQ(suspend_probability(p, ParticleClass::Fines, 1.0), 0.95);
}

TEST(Params, ShippedParameterFilesLoad) {
  for (const auto* name : {"muscatine-robotic", "muscatine-manual", "nevada-robotic", "nevada-manual"}) {
    const auto path = fixtures::shipped_data().root() / "params" / (std::string(name) + ".json");
    const auto m = load_method_profile(path.string());
    EXPECT_NO_THROW(validate(m.params)) << name;
    EXPECT_FALSE(m.calibration.empty()) << name;
  }
}

TEST(Mix, FullSuspensionTakesEverything) {
  ParticleBatch b;
  b.add(cyst(), 40);
  b.add(egg(), 10);
  auto p = lossless_params();
  auto rng = make_stream(1, {});
  const auto s = mix_and_settle(b, p, 1.0, rng);
  EXPECT_EQ(s.suspended.count(ParticleClass::Cyst), 40u);
  EXPECT_EQ(s.suspended.count(ParticleClass::Egg), 10u);
  EXPECT_EQ(s.suspended + s.sediment, b);
}

TEST(Mix, ZeroSuspensionKeepsEverything) {
  ParticleBatch b;
  b.add(cyst(), 40);
  ProcessParams p;
  p.f_suspend = 0.0;
  p.suspend_boost = 0.0;
  auto rng = make_stream(1, {});
  const auto s = mix_and_settle(b, p, 1.0, rng);
  EXPECT_TRUE(s.suspended.empty());
  EXPECT_EQ(s.sediment, b);
}

TEST(Mix, SuspendedShareIsBinomial) {
  ParticleBatch b;
  b.add(cyst(), 20000);
  ProcessParams p;
  p.f_suspend = 0.7;
  auto rng = make_stream(9, {});
  const auto s = mix_and_settle(b, p, 1.0, rng);
  expect_binomial(s.suspended.total(), 20000, 0.7);
}

TEST(Decant, PurePartitionThroughStack) {
  ParticleBatch b;
  b.add(cyst(400, 50), 7);
  b.add(egg(50), 11);
  b.add({ParticleClass::LargeDebris, 2000, 0}, 3);
  b.add({ParticleClass::Fines, 10, 0}, 100);
  const auto r = decant(b, model::standard_sieves());
  ASSERT_EQ(r.on_sieve.size(), 4u);
  EXPECT_EQ(r.on_sieve[0].count(ParticleClass::LargeDebris), 3u);
  EXPECT_EQ(r.on_sieve[1].count(ParticleClass::Cyst), 7u);
  EXPECT_EQ(r.on_sieve[3].count(ParticleClass::Egg), 11u);
  EXPECT_EQ(r.drain.count(ParticleClass::Fines), 100u);
  EXPECT_TRUE(r.on_sieve[2].empty());
}

TEST(Decant, UnorderedStackRejected) {
  const auto& s = model::standard_sieves();
  const std::vector<model::SieveSpec> reversed{s[1], s[0]};
  EXPECT_THROW(decant(ParticleBatch{}, reversed), ConfigError);
}

TEST(Decant, HoldupKeepsSubPoreMaterialAndConserves) {
  ParticleBatch b;
  b.add(egg(), 10000);
  auto rng = make_stream(3, {});
  const auto r = decant(b, model::standard_sieves(), 0.3, rng);
  std::uint64_t total = r.drain.total();
  for (const auto& s : r.on_sieve) total += s.total();
  EXPECT_EQ(total, 10000u);
  // Held on #20, then of the rest on #60, then on #200; #500 traps the remainder.
  expect_binomial(r.on_sieve[0].total(), 10000, 0.3);
  EXPECT_EQ(r.on_sieve[3].total() + r.on_sieve[2].total() + r.on_sieve[1].total() + r.on_sieve[0].total(),
            10000u);
}

TEST(Wash, ZeroDurationMovesNothing) {
  ParticleBatch on, below;
  on.add(cyst(), 30);
  auto rng = make_stream(1, {});
  EXPECT_EQ(wash(on, model::Microns{850}, below, 0.0, ProcessParams{}, rng), 0u);
  EXPECT_EQ(on.total(), 30u);
}

TEST(Wash, NegativeDurationRejected) {
  ParticleBatch on, below;
  auto rng = make_stream(1, {});
  EXPECT_THROW(wash(on, model::Microns{850}, below, -1.0, ProcessParams{}, rng), DomainError);
}

TEST(Wash, PerfectTransferMovesOnlySubPore) {
  ParticleBatch on, below;
  on.add(cyst(), 30);
  on.add({ParticleClass::LargeDebris, 1500, 0}, 4);
  auto rng = make_stream(1, {});
  const auto moved = wash(on, model::Microns{850}, below, 30.0, lossless_params(), rng);
  EXPECT_EQ(moved, 30u);
  EXPECT_EQ(below.count(ParticleClass::Cyst), 30u);
  EXPECT_EQ(on.count(ParticleClass::LargeDebris), 4u);
}

TEST(Wash, PassProbabilityCompoundsPerTenSeconds) {
  ProcessParams p;
  p.w_transfer = 0.829;
  EXPECT_NEAR(wash_pass_probability(p, 10.0), 0.829, 1e-12);
  EXPECT_NEAR(wash_pass_probability(p, 30.0), 1.0 - std::pow(0.171, 3.0), 1e-12);
  ParticleBatch on, below;
  on.add(cyst(), 20000);
  auto rng = make_stream(2, {});
  wash(on, model::Microns{850}, below, 10.0, p, rng);
  expect_binomial(below.total(), 20000, 0.829);
}

TEST(Grind, PerfectGrindReleasesEveryEgg) {
  ParticleBatch mesh, below;
  mesh.add(cyst(400, 120), 5);
  mesh.add(cyst(300, 80), 2);
  RuptureLedger ledger;
  auto rng = make_stream(1, {});
  const auto out = grind_cycle(mesh, below, lossless_params(), rng, ledger);
  EXPECT_EQ(out.ruptured, 7u);
  EXPECT_EQ(out.released, 5u * 120u + 2u * 80u);
  EXPECT_EQ(below.count(ParticleClass::Egg), 760u);
  EXPECT_EQ(mesh.count(ParticleClass::Cyst), 0u);
  EXPECT_EQ(mesh.count(ParticleClass::CystSizedDebris), 7u);
  EXPECT_EQ(ledger.retained, 0u);
}

TEST(Grind, NoRuptureNoEggs) {
  ParticleBatch mesh, below;
  mesh.add(cyst(400, 120), 5);
  auto p = lossless_params();
  p.r_rupture = 0.0;
  RuptureLedger ledger;
  auto rng = make_stream(1, {});
  const auto out = grind_cycle(mesh, below, p, rng, ledger);
  EXPECT_EQ(out.ruptured, 0u);
  EXPECT_TRUE(below.empty());
}

TEST(Grind, ReleasedPlusRetainedEqualsContent) {
  ParticleBatch mesh, below;
  mesh.add(cyst(400, 200), 50);
  auto p = lossless_params();
  p.e_release = 0.6;
  RuptureLedger ledger;
  auto rng = make_stream(4, {});
  grind_cycle(mesh, below, p, rng, ledger);
  EXPECT_EQ(ledger.released + ledger.retained, 50u * 200u);
  expect_binomial(ledger.released, 50 * 200, 0.6);
}

TEST(Thin, ZeroAndOneAreExact) {
  ParticleBatch b;
  b.add(egg(), 100);
  auto rng = make_stream(1, {});
  EXPECT_TRUE(thin(b, 0.0, rng).empty());
  EXPECT_EQ(b.total(), 100u);
  EXPECT_EQ(thin(b, 1.0, rng).total(), 100u);
  EXPECT_TRUE(b.empty());
}

TEST(Iteration, LosslessRecoversEveryEggOnce) {
  const auto profile = fixtures::shipped_data().profile("muscatine");
  const auto sample = model::synthesize_sample(profile, 17);
  auto ws = Workspace::from_sample(sample);
  const auto inventory = ws.egg_inventory();
  const auto r = run_iteration(ws, lossless_params(), {}, {17, 0, 0, 1});
  EXPECT_EQ(r.eggs, inventory);
  EXPECT_TRUE(ws.conserved());
  const auto again = run_iteration(ws, lossless_params(), {}, {17, 0, 0, 2});
  EXPECT_EQ(again.eggs, 0u);
}

TEST(Iteration, DefaultParamsConserve) {
  const auto profile = fixtures::shipped_data().profile("nevada");
  auto ws = Workspace::from_sample(model::synthesize_sample(profile, 5));
  for (std::uint64_t it = 1; it <= 4; ++it) {
    run_iteration(ws, ProcessParams{}, {}, {5, 0, 0, it});
    ASSERT_TRUE(ws.conserved()) << "iteration " << it;
  }
}

TEST(Iteration, SameStreamsSameOutcome) {
  const auto profile = fixtures::shipped_data().profile("muscatine");
  auto a = Workspace::from_sample(model::synthesize_sample(profile, 8));
  auto b = a;
  EXPECT_EQ(run_iteration(a, ProcessParams{}, {}, {8, 1, 2, 1}).eggs,
            run_iteration(b, ProcessParams{}, {}, {8, 1, 2, 1}).eggs);
  EXPECT_EQ(a.container, b.container);
}
