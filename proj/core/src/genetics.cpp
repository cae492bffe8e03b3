#include "rabs/genetics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rabs {

PermutationGenome::PermutationGenome(std::vector<std::uint16_t> order) : order_(std::move(order)) {
  position_.assign(order_.size(), 0);
  std::vector<bool> seen(order_.size(), false);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const auto t = order_[i];
    if (t >= order_.size() || seen[t]) {
      throw std::invalid_argument("genome is not a permutation of 0.." + std::to_string(order_.size() - 1));
    }
    seen[t] = true;
    position_[t] = static_cast<std::uint16_t>(i);
  }
}

PermutationGenome PermutationGenome::identity(std::size_t k) {
  std::vector<std::uint16_t> order(k);
  std::iota(order.begin(), order.end(), std::uint16_t{0});
  return PermutationGenome(std::move(order));
}

PermutationGenome PermutationGenome::random(std::size_t k, Rng& rng) {
  std::vector<std::uint16_t> order(k);
  std::iota(order.begin(), order.end(), std::uint16_t{0});
  for (std::size_t i = k; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return PermutationGenome(std::move(order));
}

std::size_t PermutationGenome::position_of(std::size_t ptype) const {
  if (ptype >= position_.size()) {
    throw std::out_of_range("particle type " + std::to_string(ptype) + " absent from genome");
  }
  return position_[ptype];
}

void PermutationGenome::swap_positions(std::size_t i, std::size_t j) {
  std::swap(order_.at(i), order_.at(j));
  position_[order_[i]] = static_cast<std::uint16_t>(i);
  position_[order_[j]] = static_cast<std::uint16_t>(j);
}

void EnergyParams::validate() const {
  if (!(initial > 0.0 && initial <= max)) throw std::invalid_argument("energy: require 0 < initial <= max");
  if (!(break_even >= 0.0 && break_even <= 1.0)) throw std::invalid_argument("energy: break_even must be in [0,1]");
  if (!(gain > 0.0)) throw std::invalid_argument("energy: gain must be positive");
  if (!(fit_threshold > 0.0 && fit_threshold < mature_threshold && mature_threshold <= max)) {
    throw std::invalid_argument("energy: require 0 < fit_threshold < mature_threshold <= max");
  }
}

double affinity(const BinaryGenome& g, const BitVector& v) {
  if (g.size() != v.size()) {
    throw std::invalid_argument("affinity: genome length " + std::to_string(g.size()) + " != vector length " +
                                std::to_string(v.size()));
  }
  if (g.empty()) return 1.0;
  return static_cast<double>(g.size() - g.hamming(v)) / static_cast<double>(g.size());
}

void expose_in_place(Agent& a, const BitVector& v, const EnergyParams& p) {
  const double next = a.energy + p.gain * (affinity(a.genome, v) - p.break_even);
  a.energy = std::clamp(next, 0.0, p.max);
  ++a.age;
}

Agent expose(Agent a, const BitVector& v, const EnergyParams& p) {
  expose_in_place(a, v, p);
  return a;
}

std::size_t roulette_select(std::span<const double> weights, double total, Rng& rng) {
  if (weights.empty()) throw std::domain_error("fps_select: empty pool");
  if (!(total > 0.0)) throw std::domain_error("fps_select: total energy is zero");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  // Rounding can leave target just past the final sum.
  return last_positive;
}

std::pair<BinaryGenome, BinaryGenome> uniform_crossover(const BinaryGenome& p1, const BinaryGenome& p2, Rng& rng) {
  if (p1.size() != p2.size()) throw std::invalid_argument("uniform_crossover: parent length mismatch");
  BinaryGenome o1 = p1;
  BinaryGenome o2 = p2;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (rng.bernoulli(0.5)) {
      o1.set(i, p2.test(i));
      o2.set(i, p1.test(i));
    }
  }
  return {std::move(o1), std::move(o2)};
}

BinaryGenome bitflip_mutate(BinaryGenome g, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("bitflip_mutate: rate outside [0,1]");
  if (rate == 0.0) return g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (rng.bernoulli(rate)) g.flip(i);
  }
  return g;
}

PermutationGenome swap_mutate(PermutationGenome g, Rng& rng) {
  if (g.size() < 2) throw std::invalid_argument("swap_mutate: genome shorter than 2");
  const std::size_t i = rng.below(g.size());
  std::size_t j = rng.below(g.size() - 1);
  if (j >= i) ++j;
  g.swap_positions(i, j);
  return g;
}

BinaryGenome random_genome(std::size_t lv, double density, Rng& rng) {
  BinaryGenome g(lv);
  for (std::size_t i = 0; i < lv; ++i) {
    if (rng.bernoulli(density)) g.set(i);
  }
  return g;
}

}  // namespace rabs
