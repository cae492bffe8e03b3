#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rabs/abs.hpp"
#include "rabs/features.hpp"
#include "rabs/genetics.hpp"
#include "rabs/random.hpp"

namespace rabs::reactive {

struct RabsConfig {
  std::size_t n_size = 200;
  std::size_t r_size = 100;
  /// Capacity of the n-agent memory set.
  std::size_t memory_size = 20;
  std::size_t ds_threshold = 10;
  /// Number of activated mature r-agents that counts as a high attack signal.
  std::size_t as_count_threshold = 3;
  /// Energy at or above which a mature r-agent can be activated.
  double as_energy_threshold = 90.0;
  double insa_threshold = 0.9;
  double recognition_threshold = 0.9;
  std::size_t consolidate_after = 50;
  std::size_t signature_size = 5;
  std::size_t seed_window = 25;
  /// Proportion R of each population replaced per evolving step.
  double reproduction_rate = 0.02;
  double offspring_mutation = 0.01;
  double spawn_mutation = 0.05;
  double refill_mutation = 0.05;
  /// Bit density of the random genomes the n-population starts from.
  double init_density = 0.05;
  /// Training populations that see no danger for this many packets are dropped.
  std::size_t stale_after = 2000;
  /// When false, packets arriving during inhibition are not shown to the n-population.
  bool expose_when_inhibited = false;
  EnergyParams energy;

  void validate() const;
};

struct NPopulation {
  std::vector<Agent> agents;
  /// A** : long-lived copies of mature n-agents.
  std::vector<Agent> memory;
  std::uint64_t next_id = 0;

  static NPopulation random(std::size_t lv, const RabsConfig& cfg, Rng& rng);
};

enum class PopulationState : std::uint8_t { Training, Consolidated };

struct RPopulation {
  std::uint64_t id = 0;
  std::vector<Agent> agents;
  /// A* : grows monotonically while training, never pruned.
  std::vector<Agent> mature;
  PopulationState state = PopulationState::Training;
  std::vector<BinaryGenome> signature;
  std::uint64_t created_at = 0;
  std::uint64_t last_danger = 0;
  /// Consecutive exposed packets with a high attack signal.
  std::size_t streak = 0;
  std::uint64_t next_id = 0;
};

struct Signals {
  std::size_t ds = 0;
  std::size_t as = 0;
  std::optional<std::uint64_t> as_source;

  friend bool operator==(const Signals&, const Signals&) = default;
};

enum class Reaction : std::uint8_t { Normal, SoftReaction, FullReaction, FullReactionWithInsa };

struct ReactionState {
  Reaction kind = Reaction::Normal;
  std::optional<std::uint64_t> population;

  friend bool operator==(const ReactionState&, const ReactionState&) = default;
};

std::string_view reaction_name(Reaction r);

struct StepNResult {
  std::size_t ds = 0;
  bool inhibited = false;
  bool exposed = false;
  bool starved = false;
  std::size_t births = 0;
  std::size_t deaths = 0;
  /// Dead agents replaced from memory genomes because no fit parent existed.
  std::size_t regrown = 0;
};

/// n-agent step: expose, count starving memory agents (DS), and evolve unless the
/// attack signal inhibits it.
StepNResult step_n(NPopulation& pop, const FeatureVector& v, std::size_t attack_signal, const RabsConfig& cfg,
                   Rng& rng);

struct StepRResult {
  std::size_t as = 0;
  bool exposed = false;
  bool starved = false;
  std::size_t culled = 0;
};

/// Mature r-agents activated by v: energy >= as_energy_threshold and affinity >= recognition_threshold.
std::size_t count_activated(std::span<const Agent> mature, const FeatureVector& v, const RabsConfig& cfg);

/// r-agent step; the population trains only while the danger signal exceeds its threshold.
/// Agents maturing within insa_threshold of a `self_refs` genome are culled instead of joining A*.
StepRResult step_r(RPopulation& pop, const FeatureVector& v, std::size_t danger_signal, std::uint64_t now,
                   const RabsConfig& cfg, Rng& rng, std::span<const BinaryGenome> self_refs = {});

ReactionState evaluate_rules(std::size_t ds, std::size_t as, std::optional<std::uint64_t> as_source,
                             const RabsConfig& cfg);

/// Seeds r_size agents from the recent window (uniform random genomes when it is empty).
RPopulation spawn_r_population(std::span<const FeatureVector> recent, std::size_t lv, std::uint64_t id,
                               std::uint64_t now, const RabsConfig& cfg, Rng& rng);

/// Freezes a trained population into its signature. Returns true on consolidation.
/// Throws std::logic_error when the population is already consolidated.
bool try_consolidate(RPopulation& pop, const RabsConfig& cfg, std::uint64_t now);

struct SignatureMatch {
  std::uint64_t id = 0;
  double score = 0.0;
};

/// Best consolidated population for v, ties to the lowest id; empty below the threshold.
std::optional<SignatureMatch> match_signatures(const FeatureVector& v, std::span<const RPopulation> pops,
                                               double threshold);

struct PurgeStats {
  std::size_t removed_agents = 0;
  std::size_t removed_memory = 0;
  bool catastrophic = false;
};

/// Inverted negative selection: drops every n-agent (and memory agent) too close to a
/// non-self reference, then refills the agent set from mutated clones of the survivors.
PurgeStats insa_purge(NPopulation& pop, std::span<const BinaryGenome> references, double threshold,
                      const RabsConfig& cfg, Rng& rng);

/// Highest affinity of any live n-agent or memory agent to any reference genome.
double max_reference_affinity(const NPopulation& pop, std::span<const BinaryGenome> references);

struct Verdict {
  Prediction prediction = Prediction::Normal;
  std::optional<std::uint64_t> attack_id;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct PacketOutcome {
  std::uint64_t seq_no = 0;
  Verdict verdict;
  Signals signals;
  ReactionState reaction;
  bool fast_path = false;
  std::size_t active_populations = 0;
};

struct EngineCounters {
  std::uint64_t spawned = 0;
  std::uint64_t consolidated = 0;
  std::uint64_t collected = 0;
  std::uint64_t purges = 0;
  std::uint64_t catastrophic_purges = 0;
  std::uint64_t starvations = 0;
  std::uint64_t regrown = 0;
  std::uint64_t culled = 0;
};

/// Complete engine state; everything a snapshot must capture.
struct EngineState {
  RabsConfig config;
  FeatureSpec spec;
  Rng rng;
  NPopulation npop;
  std::vector<RPopulation> rpops;
  std::deque<FeatureVector> recent;
  std::uint64_t packets_seen = 0;
  std::uint64_t next_population_id = 0;
  Signals last_signals;
  EngineCounters counters;
};

/// Inconsistency injector: adds a consolidated population with the given signature so that
/// rule (c) and the purge can be exercised on demand. Returns the new population id.
/// Throws std::invalid_argument on an empty or oversized signature or a length mismatch.
std::uint64_t inject_signature(EngineState& state, std::vector<BinaryGenome> signature);

/// Sequential R-ABS state machine over one packet stream.
class RabsEngine {
 public:
  /// Uninitialised engine; process() throws until one is assigned from a configured engine.
  RabsEngine() = default;
  RabsEngine(RabsConfig config, FeatureSpec spec, std::uint64_t seed);
  explicit RabsEngine(EngineState state);

  bool initialized() const noexcept { return state_.has_value(); }

  PacketOutcome process(const PacketRecord& p);
  PacketOutcome process_vector(const FeatureVector& v);

  const EngineState& state() const;
  /// Mutable access for fault injection in tests and tools.
  EngineState& mutable_state();

  std::vector<const RPopulation*> consolidated() const;
  const RPopulation* training() const;

 private:
  EngineState& require();

  std::optional<EngineState> state_;
};

}  // namespace rabs::reactive
