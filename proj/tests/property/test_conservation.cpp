#include <gtest/gtest.h>

#include "generators.hpp"
#include "sieve/model/sieve.hpp"
#include "sieve/sim/process.hpp"

using namespace sieve;
using namespace sieve::sim;

namespace {

constexpr int kBatches = 10000;

std::uint64_t total(const DecantResult& r) {
  std::uint64_t n = r.drain.total();
  for (const auto& s : r.on_sieve) n += s.total();
  return n;
}

}  // namespace

TEST(Conservation, KernelStagesOnRandomBatches) {
  for (int i = 0; i < kBatches; ++i) {
    auto rng = make_stream(31337, {static_cast<std::uint64_t>(i)});
    const auto batch = fixtures::random_batch(rng);
    const auto p = fixtures::random_params(rng);
    const auto n = batch.total();
    const auto eggs = batch.egg_inventory();

    const auto s = mix_and_settle(batch, p, rng.uniform(), rng);
    ASSERT_EQ(s.suspended + s.sediment, batch) << "mix, batch " << i;

    const auto d = decant(s.suspended, model::standard_sieves(), p.decant_holdup, rng);
    ASSERT_EQ(total(d), s.suspended.total()) << "decant, batch " << i;

    auto on = batch, below = ParticleBatch{};
    wash(on, model::Microns{250}, below, 10.0 * fixtures::pick(rng, 0, 6), p, rng);
    ASSERT_EQ(on.total() + below.total(), n) << "wash, batch " << i;
    ASSERT_EQ(on.egg_inventory() + below.egg_inventory(), eggs);

    auto mesh = batch, under = ParticleBatch{};
    RuptureLedger ledger;
    grind_cycle(mesh, under, p, rng, ledger);
    ASSERT_EQ(mesh.egg_inventory() + under.egg_inventory() + ledger.retained, eggs) << "grind, batch " << i;
    ASSERT_EQ(mesh.total() + under.total(), n + ledger.released) << "grind, batch " << i;

    auto src = batch;
    const auto taken = thin(src, rng.uniform(), rng);
    ASSERT_EQ(src + taken, batch) << "thin, batch " << i;
  }
}

TEST(Conservation, WorkspaceThroughRepeatedIterations) {
  for (int i = 0; i < 2000; ++i) {
    auto rng = make_stream(4242, {static_cast<std::uint64_t>(i)});
    model::SoilSample sample;
    sample.batch = fixtures::random_batch(rng, 20, 2000);
    auto ws = Workspace::from_sample(sample);
    const auto p = fixtures::random_params(rng);
    for (std::uint64_t it = 1; it <= 3; ++it) {
      run_iteration(ws, p, {}, {static_cast<std::uint64_t>(i), 0, 0, it});
      ASSERT_TRUE(ws.conserved()) << "sample " << i << " iteration " << it;
    }
  }
}

TEST(Conservation, LosslessIterationRecoversEveryEgg) {
  for (int i = 0; i < 1000; ++i) {
    auto rng = make_stream(99, {static_cast<std::uint64_t>(i)});
    model::SoilSample sample;
    // Free eggs in soil pass #60 at the decant and are not part of the extraction.
    for (const auto& [k, n] : fixtures::random_batch(rng, 20, 500)) {
      if (k.cls != model::ParticleClass::Egg) sample.batch.add(k, n);
    }
    auto ws = Workspace::from_sample(sample);
    const auto eggs = ws.egg_inventory();
    const auto r = run_iteration(ws, lossless_params(), {}, {static_cast<std::uint64_t>(i), 0, 0, 1});
    ASSERT_EQ(r.eggs, eggs) << "sample " << i;
  }
}
