#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rabs/bit_vector.hpp"
#include "rabs/random.hpp"

namespace rabs {

using BinaryGenome = BitVector;

/// Ordering of particle types. position_of() is kept in sync with order()
/// so nutrition lookups are O(1).
class PermutationGenome {
 public:
  PermutationGenome() = default;
  /// Throws std::invalid_argument unless `order` is a permutation of 0..k-1.
  explicit PermutationGenome(std::vector<std::uint16_t> order);

  static PermutationGenome identity(std::size_t k);
  static PermutationGenome random(std::size_t k, Rng& rng);

  std::size_t size() const noexcept { return order_.size(); }
  const std::vector<std::uint16_t>& order() const noexcept { return order_; }
  std::size_t position_of(std::size_t ptype) const;
  void swap_positions(std::size_t i, std::size_t j);

  friend bool operator==(const PermutationGenome& a, const PermutationGenome& b) { return a.order_ == b.order_; }

 private:
  std::vector<std::uint16_t> order_;
  std::vector<std::uint16_t> position_;
};

template <class Genome>
struct BasicAgent {
  double energy = 0.0;
  Genome genome;
  std::uint64_t age = 0;
  /// Unique within the owning population; used for deterministic tie-breaks.
  std::uint64_t id = 0;

  bool alive() const noexcept { return energy > 0.0; }
};

using Agent = BasicAgent<BinaryGenome>;
using AbsAgent = BasicAgent<PermutationGenome>;

struct EnergyParams {
  double initial = 50.0;
  double max = 100.0;
  /// Gain applied to (affinity - break_even).
  double gain = 10.0;
  double break_even = 0.93;
  double fit_threshold = 60.0;
  double mature_threshold = 90.0;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Fraction of positions where genome and vector agree.
double affinity(const BinaryGenome& g, const BitVector& v);

/// Energy moves by gain * (affinity - break_even), clamped to [0, max]. Age advances.
Agent expose(Agent a, const BitVector& v, const EnergyParams& p);
void expose_in_place(Agent& a, const BitVector& v, const EnergyParams& p);

/// Fitness-proportionate (roulette) selection; returns an index into pool.
/// Throws std::domain_error when total energy is not positive.
template <class A>
std::size_t fps_select(std::span<const A> pool, Rng& rng);

/// Roulette over precomputed weights. Throws std::domain_error on non-positive total.
std::size_t roulette_select(std::span<const double> weights, double total, Rng& rng);

std::pair<BinaryGenome, BinaryGenome> uniform_crossover(const BinaryGenome& p1, const BinaryGenome& p2, Rng& rng);

/// Flips each bit independently with probability `rate` in [0, 1].
BinaryGenome bitflip_mutate(BinaryGenome g, double rate, Rng& rng);

/// Exchanges two distinct positions.
PermutationGenome swap_mutate(PermutationGenome g, Rng& rng);

BinaryGenome random_genome(std::size_t lv, double density, Rng& rng);

template <class A>
std::size_t fps_select(std::span<const A> pool, Rng& rng) {
  std::vector<double> w;
  w.reserve(pool.size());
  double total = 0.0;
  for (const auto& a : pool) {
    w.push_back(a.energy);
    total += a.energy;
  }
  return roulette_select(w, total, rng);
}

}  // namespace rabs
