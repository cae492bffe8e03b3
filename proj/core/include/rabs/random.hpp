#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace rabs {

/// Seeded random stream. Wraps mt19937_64 and derives variates with
/// fixed arithmetic so a seed produces the same sequence on every standard
/// library. The full engine state round-trips through state()/set_state().
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform real in [0, 1) with 53 bits of precision.
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::string state() const;
  void set_state(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace rabs
