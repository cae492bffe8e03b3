#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "rabs/genetics.hpp"

using namespace rabs;

namespace {

constexpr std::uint64_t kGoldenSeed = 42;

EnergyParams example_energy() {
  EnergyParams p;
  p.gain = 10.0;
  p.break_even = 0.75;
  p.max = 100.0;
  return p;
}

Agent agent(double energy, const std::string& bits) { return {energy, BitVector::from_string(bits), 0, 0}; }

}  // namespace

TEST(Affinity, Examples) {
  const auto v = BitVector::from_string("1011001110");
  EXPECT_DOUBLE_EQ(affinity(v, v), 1.0);
  EXPECT_DOUBLE_EQ(affinity(v.complement(), v), 0.0);
  EXPECT_DOUBLE_EQ(affinity(BitVector::from_string("1100"), BitVector::from_string("1000")), 0.75);
}

TEST(Affinity, SymmetricAndLengthChecked) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_genome(39, 0.5, rng);
    const auto b = random_genome(39, 0.5, rng);
    EXPECT_DOUBLE_EQ(affinity(a, b), affinity(b, a));
  }
  EXPECT_THROW(affinity(BitVector(3), BitVector(4)), std::invalid_argument);
}

TEST(Expose, BreakEvenLeavesEnergy) {
  const auto p = example_energy();
  // 3 of 4 positions agree: affinity 0.75 = break_even.
  const auto a = expose(agent(42.0, "1100"), BitVector::from_string("1000"), p);
  EXPECT_DOUBLE_EQ(a.energy, 42.0);
  EXPECT_EQ(a.age, 1U);
  EXPECT_EQ(a.genome.to_string(), "1100");
}

TEST(Expose, ClampsAtZeroAndMax) {
  const auto p = example_energy();
  const auto v = BitVector::from_string("1010");
  const auto dead = expose(agent(1.0, "0101"), v, p);
  EXPECT_DOUBLE_EQ(dead.energy, 0.0);
  EXPECT_FALSE(dead.alive());
  const auto full = expose(agent(99.0, "1010"), v, p);
  EXPECT_DOUBLE_EQ(full.energy, 100.0);
}

TEST(Expose, EnergyStaysInRange) {
  const EnergyParams p;
  Rng rng(3);
  Agent a{p.initial, random_genome(39, 0.3, rng), 0, 0};
  const auto genome = a.genome;
  for (int i = 0; i < 2000; ++i) {
    expose_in_place(a, random_genome(39, 0.3, rng), p);
    EXPECT_GE(a.energy, 0.0);
    EXPECT_LE(a.energy, p.max);
  }
  EXPECT_EQ(a.genome, genome);
}

TEST(EnergyParams, Validation) {
  EnergyParams p;
  EXPECT_NO_THROW(p.validate());
  p.fit_threshold = p.mature_threshold;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.initial = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.break_even = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Fps, SingleAndZeroWeight) {
  Rng rng(7);
  const std::vector<Agent> one{agent(5.0, "1")};
  EXPECT_EQ(fps_select<Agent>(one, rng), 0U);
  const std::vector<Agent> pair{agent(0.0, "0"), agent(10.0, "1")};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(fps_select<Agent>(pair, rng), 1U);
}

TEST(Fps, ZeroTotalThrows) {
  Rng rng(7);
  const std::vector<Agent> none{agent(0.0, "0"), agent(0.0, "1")};
  EXPECT_THROW(fps_select<Agent>(none, rng), std::domain_error);
  EXPECT_THROW(fps_select<Agent>(std::vector<Agent>{}, rng), std::domain_error);
}

TEST(Fps, QuarterThreeQuarters) {
  Rng rng(2024);
  const std::vector<Agent> pool{agent(25.0, "0"), agent(75.0, "1")};
  std::size_t second = 0;
  for (int i = 0; i < 10000; ++i) second += fps_select<Agent>(pool, rng);
  EXPECT_NEAR(static_cast<double>(second), 7500.0, 150.0);
}

TEST(Fps, ChiSquareAgainstEnergyProportions) {
  Rng rng(99);
  const std::vector<double> energies{10.0, 20.0, 30.0, 40.0};
  std::vector<Agent> pool;
  for (double e : energies) pool.push_back(agent(e, "0"));
  std::vector<double> counts(energies.size(), 0.0);
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) counts[fps_select<Agent>(pool, rng)] += 1.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double expected = kDraws * energies[i] / 100.0;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  // Upper 0.001 quantile of chi-square with 3 degrees of freedom.
  EXPECT_LT(chi2, 16.266);
}

TEST(Crossover, IdenticalParents) {
  Rng rng(1);
  const auto p = BitVector::from_string("1011001");
  const auto [o1, o2] = uniform_crossover(p, p, rng);
  EXPECT_EQ(o1, p);
  EXPECT_EQ(o2, p);
}

TEST(Crossover, ConservesGenesExhaustively4Bit) {
  Rng rng(5);
  for (unsigned a = 0; a < 16; ++a) {
    for (unsigned b = 0; b < 16; ++b) {
      BitVector p1(4);
      BitVector p2(4);
      for (std::size_t i = 0; i < 4; ++i) {
        p1.set(i, (a >> i) & 1U);
        p2.set(i, (b >> i) & 1U);
      }
      for (int rep = 0; rep < 8; ++rep) {
        const auto [o1, o2] = uniform_crossover(p1, p2, rng);
        for (std::size_t i = 0; i < 4; ++i) {
          const bool same = (o1.test(i) == p1.test(i) && o2.test(i) == p2.test(i)) ||
                            (o1.test(i) == p2.test(i) && o2.test(i) == p1.test(i));
          EXPECT_TRUE(same) << a << "," << b << " bit " << i;
        }
      }
    }
  }
}

TEST(Crossover, LengthMismatch) {
  Rng rng(1);
  EXPECT_THROW(uniform_crossover(BitVector(3), BitVector(4), rng), std::invalid_argument);
}

TEST(Crossover, Golden) {
  Rng rng(kGoldenSeed);
  const auto [o1, o2] = uniform_crossover(BitVector::from_string("0000"), BitVector::from_string("1111"), rng);
  EXPECT_EQ(o1.to_string(), "0001");
  EXPECT_EQ(o2.to_string(), "1110");
}

TEST(Bitflip, RateZeroAndOne) {
  Rng rng(8);
  const auto g = BitVector::from_string("1100101");
  EXPECT_EQ(bitflip_mutate(g, 0.0, rng), g);
  EXPECT_EQ(bitflip_mutate(g, 1.0, rng), g.complement());
  EXPECT_THROW(bitflip_mutate(g, -0.1, rng), std::invalid_argument);
  EXPECT_THROW(bitflip_mutate(g, 1.1, rng), std::invalid_argument);
}

TEST(Bitflip, MeanFlips) {
  Rng rng(31);
  const BitVector g(39);
  std::size_t flips = 0;
  constexpr int kTrials = 10000;
  for (int i = 0; i < kTrials; ++i) flips += bitflip_mutate(g, 0.05, rng).count();
  EXPECT_NEAR(static_cast<double>(flips) / kTrials, 1.95, 0.05);
}

TEST(Swap, TwoElements) {
  Rng rng(3);
  const auto g = swap_mutate(PermutationGenome({0, 1}), rng);
  EXPECT_EQ(g.order(), (std::vector<std::uint16_t>{1, 0}));
}

TEST(Swap, PermutationClosureAndTwoPositions) {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto g = PermutationGenome::random(12, rng);
    const auto m = swap_mutate(g, rng);
    auto a = g.order();
    auto b = m.order();
    std::size_t diff = 0;
    for (std::size_t k = 0; k < a.size(); ++k) diff += a[k] != b[k] ? 1 : 0;
    EXPECT_EQ(diff, 2U);
    std::sort(b.begin(), b.end());
    std::sort(a.begin(), a.end());
    EXPECT_EQ(a, b);
    for (std::size_t k = 0; k < m.size(); ++k) EXPECT_EQ(m.order()[m.position_of(k)], k);
  }
}

TEST(Swap, TooShort) {
  Rng rng(1);
  EXPECT_THROW(swap_mutate(PermutationGenome({0}), rng), std::invalid_argument);
}

TEST(Swap, Golden) {
  // (e,a,c,b,d) with a=0 .. e=4.
  Rng rng(kGoldenSeed);
  const auto m = swap_mutate(PermutationGenome({4, 0, 2, 1, 3}), rng);
  EXPECT_EQ(m.order(), (std::vector<std::uint16_t>{0, 4, 2, 1, 3}));
}

TEST(Permutation, RejectsNonPermutation) {
  EXPECT_THROW(PermutationGenome({0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(PermutationGenome({0, 3}), std::invalid_argument);
}

TEST(Determinism, SameSeedSameStream) {
  Rng a(123);
  Rng b(123);
  EXPECT_EQ(random_genome(39, 0.5, a), random_genome(39, 0.5, b));
  EXPECT_EQ(uniform_crossover(BitVector(39).complement(), BitVector(39), a),
            uniform_crossover(BitVector(39).complement(), BitVector(39), b));
  EXPECT_EQ(swap_mutate(PermutationGenome::identity(10), a), swap_mutate(PermutationGenome::identity(10), b));
}

TEST(Rng, StateRoundTrip) {
  Rng a(77);
  for (int i = 0; i < 10; ++i) a.next();
  Rng b;
  b.set_state(a.state());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_THROW(b.set_state("garbage"), std::invalid_argument);
}
