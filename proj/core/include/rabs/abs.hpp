#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "rabs/features.hpp"
#include "rabs/genetics.hpp"
#include "rabs/random.hpp"

namespace rabs {

enum class Prediction : std::uint8_t { Normal, Attack };

namespace abs {

struct Particle {
  std::size_t ptype = 0;
  std::size_t capacity = 1;
};

struct AbsParams {
  /// Maximum energy a particle delivers.
  double phi = 5.0;
  /// Penalty per genome position.
  double epsilon = 0.3;
  double reproduction_energy = 80.0;
  std::size_t population_size = 200;
  std::size_t particle_capacity = 5;
  /// Observer window length and z-score rule.
  std::size_t window = 50;
  double k = 3.0;
  double delta_floor = 1.0;

  void validate(const EnergyParams& energy) const;
};

/// Sum over particles of (phi - epsilon * position of the particle type in the genome).
double nutrition(const PermutationGenome& genome, std::span<const Particle> particles, double phi, double epsilon);

/// One particle per set bit, typed by bit index.
std::vector<Particle> packet_to_particles(const FeatureVector& v, std::size_t capacity);

struct AbsPopulation {
  std::vector<AbsAgent> agents;
  std::uint64_t next_id = 0;

  static AbsPopulation random(std::size_t particle_types, const AbsParams& params, const EnergyParams& energy,
                              Rng& rng);
  double mean_energy() const;
};

struct AbsStepStats {
  std::size_t particles = 0;
  std::size_t births = 0;
  std::size_t deaths = 0;
  std::size_t cardinality = 0;
  double mean_energy = 0.0;
};

/// Topology-free step: each particle feeds up to `capacity` distinct agents drawn uniformly,
/// agents at or above the reproduction energy spawn a swap-mutated child, dead agents are
/// dropped and the population is truncated or padded back to its configured size.
AbsStepStats abs_step(AbsPopulation& pop, const FeatureVector& v, const AbsParams& params,
                      const EnergyParams& energy, Rng& rng);

struct ObserverState {
  std::deque<double> window;
  std::size_t capacity = 0;
  double mean = 0.0;
  double stddev = 0.0;
  bool calibrated = false;

  void push(double m);
};

/// Population mean and standard deviation of the calibration sequence.
ObserverState observer_calibrate(std::span<const double> means, std::size_t window);

/// Attack iff current_mean < mean - k * stddev - delta_floor.
Prediction observer_classify(const ObserverState& obs, double current_mean, double k, double delta_floor);

/// Population plus external observer, driven one feature vector at a time.
class AbsDetector {
 public:
  AbsDetector(std::size_t particle_types, AbsParams params, EnergyParams energy, std::uint64_t seed);

  /// Advances the population and records the new mean energy in the observer window.
  AbsStepStats step(const FeatureVector& v);
  void calibrate(std::span<const double> means);
  Prediction classify(double current_mean) const;

  const AbsPopulation& population() const noexcept { return pop_; }
  const ObserverState& observer() const noexcept { return observer_; }
  const AbsParams& params() const noexcept { return params_; }

 private:
  AbsParams params_;
  EnergyParams energy_;
  Rng rng_;
  AbsPopulation pop_;
  ObserverState observer_;
};

}  // namespace abs
}  // namespace rabs
