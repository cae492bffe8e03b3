#include "rabs/abs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rabs::abs {

namespace {

bool stronger(const AbsAgent& a, const AbsAgent& b) {
  if (a.energy != b.energy) return a.energy > b.energy;
  return a.id < b.id;
}

}  // namespace

void AbsParams::validate(const EnergyParams& energy) const {
  if (!(phi > 0.0)) throw std::invalid_argument("abs: phi must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("abs: epsilon must be non-negative");
  if (!(reproduction_energy > 0.0 && reproduction_energy <= energy.max)) {
    throw std::invalid_argument("abs: reproduction_energy must be in (0, E_max]");
  }
  if (population_size == 0) throw std::invalid_argument("abs: population_size must be positive");
  if (particle_capacity == 0) throw std::invalid_argument("abs: particle_capacity must be positive");
  if (window == 0) throw std::invalid_argument("abs: window must be positive");
  if (!(k >= 0.0) || !(delta_floor >= 0.0)) throw std::invalid_argument("abs: k and delta_floor must be >= 0");
}

double nutrition(const PermutationGenome& genome, std::span<const Particle> particles, double phi, double epsilon) {
  double total = 0.0;
  for (const auto& p : particles) {
    total += phi - epsilon * static_cast<double>(genome.position_of(p.ptype));
  }
  return total;
}

std::vector<Particle> packet_to_particles(const FeatureVector& v, std::size_t capacity) {
  std::vector<Particle> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.test(i)) out.push_back({i, capacity});
  }
  return out;
}

AbsPopulation AbsPopulation::random(std::size_t particle_types, const AbsParams& params,
                                    const EnergyParams& energy, Rng& rng) {
  AbsPopulation pop;
  pop.agents.reserve(params.population_size);
  for (std::size_t i = 0; i < params.population_size; ++i) {
    pop.agents.push_back({energy.initial, PermutationGenome::random(particle_types, rng), 0, pop.next_id++});
  }
  return pop;
}

double AbsPopulation::mean_energy() const {
  if (agents.empty()) return 0.0;
  double s = 0.0;
  for (const auto& a : agents) s += a.energy;
  return s / static_cast<double>(agents.size());
}

AbsStepStats abs_step(AbsPopulation& pop, const FeatureVector& v, const AbsParams& params,
                      const EnergyParams& energy, Rng& rng) {
  if (pop.agents.empty()) throw std::invalid_argument("abs_step: empty population");
  AbsStepStats stats;
  const auto particles = packet_to_particles(v, params.particle_capacity);
  stats.particles = particles.size();

  std::vector<std::size_t> idx(pop.agents.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (const auto& particle : particles) {
    // Partial Fisher-Yates: the first `m` slots become a uniform sample without replacement.
    const std::size_t m = std::min(particle.capacity, idx.size());
    for (std::size_t s = 0; s < m; ++s) {
      std::swap(idx[s], idx[s + rng.below(idx.size() - s)]);
      auto& agent = pop.agents[idx[s]];
      if (!agent.alive()) continue;
      const double gain = params.phi - params.epsilon * static_cast<double>(agent.genome.position_of(particle.ptype));
      agent.energy = std::clamp(agent.energy + gain, 0.0, energy.max);
    }
  }

  const std::size_t before = pop.agents.size();
  for (std::size_t i = 0; i < before; ++i) {
    auto& parent = pop.agents[i];
    ++parent.age;
    if (parent.alive() && parent.energy >= params.reproduction_energy) {
      parent.energy -= params.reproduction_energy / 2.0;
      AbsAgent child{energy.initial, swap_mutate(parent.genome, rng), 0, pop.next_id++};
      pop.agents.push_back(std::move(child));
      ++stats.births;
    }
  }

  const auto dead = std::remove_if(pop.agents.begin(), pop.agents.end(), [](const AbsAgent& a) { return !a.alive(); });
  stats.deaths = static_cast<std::size_t>(pop.agents.end() - dead);
  pop.agents.erase(dead, pop.agents.end());

  if (pop.agents.empty()) {
    pop.agents = AbsPopulation::random(v.size(), params, energy, rng).agents;
    for (auto& a : pop.agents) a.id = pop.next_id++;
  } else if (pop.agents.size() > params.population_size) {
    std::sort(pop.agents.begin(), pop.agents.end(), stronger);
    pop.agents.resize(params.population_size);
  } else if (pop.agents.size() < params.population_size) {
    std::sort(pop.agents.begin(), pop.agents.end(), stronger);
    const std::size_t survivors = pop.agents.size();
    for (std::size_t i = 0; pop.agents.size() < params.population_size; ++i) {
      const auto& src = pop.agents[i % survivors];
      AbsAgent clone{energy.initial, swap_mutate(src.genome, rng), 0, pop.next_id++};
      pop.agents.push_back(std::move(clone));
    }
  }
  std::sort(pop.agents.begin(), pop.agents.end(), [](const AbsAgent& a, const AbsAgent& b) { return a.id < b.id; });

  stats.cardinality = pop.agents.size();
  stats.mean_energy = pop.mean_energy();
  return stats;
}

void ObserverState::push(double m) {
  window.push_back(m);
  while (window.size() > capacity) window.pop_front();
}

ObserverState observer_calibrate(std::span<const double> means, std::size_t window) {
  if (window == 0) throw std::invalid_argument("observer_calibrate: window must be positive");
  if (means.size() < window) {
    throw std::invalid_argument("observer_calibrate: need at least " + std::to_string(window) + " means, got " +
                                std::to_string(means.size()));
  }
  ObserverState s;
  s.capacity = window;
  const double n = static_cast<double>(means.size());
  s.mean = std::accumulate(means.begin(), means.end(), 0.0) / n;
  double sq = 0.0;
  for (double m : means) sq += (m - s.mean) * (m - s.mean);
  s.stddev = std::sqrt(sq / n);
  for (std::size_t i = means.size() - window; i < means.size(); ++i) s.window.push_back(means[i]);
  s.calibrated = true;
  return s;
}

Prediction observer_classify(const ObserverState& obs, double current_mean, double k, double delta_floor) {
  if (!obs.calibrated) throw std::logic_error("observer_classify: observer not calibrated");
  return current_mean < obs.mean - k * obs.stddev - delta_floor ? Prediction::Attack : Prediction::Normal;
}

AbsDetector::AbsDetector(std::size_t particle_types, AbsParams params, EnergyParams energy, std::uint64_t seed)
    : params_(params), energy_(energy), rng_(seed) {
  params_.validate(energy_);
  pop_ = AbsPopulation::random(particle_types, params_, energy_, rng_);
  observer_.capacity = params_.window;
}

AbsStepStats AbsDetector::step(const FeatureVector& v) {
  auto stats = abs_step(pop_, v, params_, energy_, rng_);
  observer_.push(stats.mean_energy);
  return stats;
}

void AbsDetector::calibrate(std::span<const double> means) {
  observer_ = observer_calibrate(means, params_.window);
}

Prediction AbsDetector::classify(double current_mean) const {
  return observer_classify(observer_, current_mean, params_.k, params_.delta_floor);
}

}  // namespace rabs::abs
