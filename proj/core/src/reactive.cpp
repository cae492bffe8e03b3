#include "rabs/reactive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace rabs::reactive {

namespace {

bool weaker(const Agent& a, const Agent& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.id < b.id;
}

bool stronger(const Agent& a, const Agent& b) {
  if (a.energy != b.energy) return a.energy > b.energy;
  return a.id < b.id;
}

struct EvolveResult {
  bool starved = false;
  std::size_t births = 0;
  std::size_t deaths = 0;
};

/// Shared reproduction + replacement of the n- and r-agent loops: FPS over the fit set,
/// uniform crossover in pairs until r offspring exist, weakest agents replaced.
EvolveResult evolve(std::vector<Agent>& agents, std::uint64_t& next_id, const RabsConfig& cfg, Rng& rng) {
  EvolveResult res;
  const auto& e = cfg.energy;
  std::vector<std::size_t> fit;
  std::vector<double> weights;
  double total = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (!agents[i].alive()) ++res.deaths;
    if (agents[i].energy >= e.fit_threshold) {
      fit.push_back(i);
      weights.push_back(agents[i].energy);
      total += agents[i].energy;
    }
  }
  if (fit.empty()) {
    res.starved = true;
    return res;
  }
  const auto proportional = static_cast<std::size_t>(
      std::ceil(cfg.reproduction_rate * static_cast<double>(agents.size()) - 1e-9));
  const std::size_t wanted = std::min(std::max(res.deaths, proportional), agents.size());
  std::vector<Agent> offspring;
  offspring.reserve(wanted + 1);
  while (offspring.size() < wanted) {
    const auto& p1 = agents[fit[roulette_select(weights, total, rng)]];
    const auto& p2 = agents[fit[roulette_select(weights, total, rng)]];
    auto [g1, g2] = uniform_crossover(p1.genome, p2.genome, rng);
    offspring.push_back({e.initial, bitflip_mutate(std::move(g1), cfg.offspring_mutation, rng), 0, next_id++});
    offspring.push_back({e.initial, bitflip_mutate(std::move(g2), cfg.offspring_mutation, rng), 0, next_id++});
  }
  const std::size_t n = std::min(offspring.size(), agents.size());
  std::vector<std::size_t> order(agents.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) { return weaker(agents[a], agents[b]); });
  for (std::size_t k = 0; k < n; ++k) agents[order[k]] = std::move(offspring[k]);
  res.births = n;
  return res;
}

/// Replaces the weakest memory members with stronger mature candidates.
void update_memory(std::vector<Agent>& memory, std::vector<Agent> candidates, std::size_t capacity) {
  std::unordered_set<std::uint64_t> present;
  for (const auto& m : memory) present.insert(m.id);
  std::sort(candidates.begin(), candidates.end(), stronger);
  for (auto& c : candidates) {
    if (present.contains(c.id)) continue;
    if (memory.size() < capacity) {
      present.insert(c.id);
      memory.push_back(std::move(c));
      continue;
    }
    auto weakest = std::min_element(memory.begin(), memory.end(), weaker);
    if (weakest == memory.end() || !(c.energy > weakest->energy)) break;
    present.erase(weakest->id);
    present.insert(c.id);
    *weakest = std::move(c);
  }
}

double best_affinity(const BinaryGenome& g, std::span<const BinaryGenome> refs) {
  double best = 0.0;
  for (const auto& r : refs) best = std::max(best, affinity(g, r));
  return best;
}

}  // namespace

void RabsConfig::validate() const {
  energy.validate();
  if (n_size == 0 || r_size == 0) throw std::invalid_argument("rabs: population sizes must be positive");
  if (memory_size == 0) throw std::invalid_argument("rabs: memory_size must be positive");
  if (as_count_threshold == 0) throw std::invalid_argument("rabs: as_count_threshold must be positive");
  if (ds_threshold >= memory_size) {
    throw std::invalid_argument("rabs: ds_threshold must be below memory_size or DS can never exceed it");
  }
  if (!(insa_threshold > 0.0 && insa_threshold <= 1.0)) throw std::invalid_argument("rabs: insa_threshold in (0,1]");
  if (!(recognition_threshold >= 0.5 && recognition_threshold <= 1.0)) {
    throw std::invalid_argument("rabs: recognition_threshold in [0.5,1]");
  }
  if (consolidate_after == 0 || signature_size == 0 || seed_window == 0) {
    throw std::invalid_argument("rabs: consolidate_after, signature_size and seed_window must be positive");
  }
  if (!(reproduction_rate > 0.0 && reproduction_rate <= 1.0)) {
    throw std::invalid_argument("rabs: reproduction_rate in (0,1]");
  }
  for (double r : {offspring_mutation, spawn_mutation, refill_mutation, init_density}) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rabs: mutation rates and density in [0,1]");
  }
  if (stale_after == 0) throw std::invalid_argument("rabs: stale_after must be positive");
}

NPopulation NPopulation::random(std::size_t lv, const RabsConfig& cfg, Rng& rng) {
  NPopulation pop;
  pop.agents.reserve(cfg.n_size);
  for (std::size_t i = 0; i < cfg.n_size; ++i) {
    pop.agents.push_back({cfg.energy.initial, random_genome(lv, cfg.init_density, rng), 0, pop.next_id++});
  }
  return pop;
}

std::string_view reaction_name(Reaction r) {
  switch (r) {
    case Reaction::Normal: return "normal";
    case Reaction::SoftReaction: return "soft";
    case Reaction::FullReaction: return "full";
    case Reaction::FullReactionWithInsa: return "full+insa";
  }
  return "?";
}

StepNResult step_n(NPopulation& pop, const FeatureVector& v, std::size_t attack_signal, const RabsConfig& cfg,
                   Rng& rng) {
  StepNResult res;
  const auto& e = cfg.energy;
  res.inhibited = attack_signal >= cfg.as_count_threshold;
  res.exposed = !res.inhibited || cfg.expose_when_inhibited;
  if (res.exposed) {
    for (auto& a : pop.agents) {
      if (a.alive()) expose_in_place(a, v, e);
    }
    for (auto& m : pop.memory) {
      if (m.alive()) expose_in_place(m, v, e);
    }
  }
  res.ds = static_cast<std::size_t>(std::count_if(pop.memory.begin(), pop.memory.end(),
                                                  [&](const Agent& m) { return m.energy < e.fit_threshold; }));
  if (res.inhibited) return res;

  std::vector<Agent> mature;
  for (const auto& a : pop.agents) {
    if (a.energy >= e.mature_threshold) mature.push_back(a);
  }
  auto ev = evolve(pop.agents, pop.next_id, cfg, rng);
  res.starved = ev.starved;
  res.births = ev.births;
  res.deaths = ev.deaths;
  if (ev.starved && ev.deaths > 0) {
    // No fit parents: dead agents are regrown from the memory genomes (random when memory is empty).
    const std::size_t lv = v.size();
    for (auto& a : pop.agents) {
      if (a.alive()) continue;
      auto g = pop.memory.empty() ? random_genome(lv, cfg.init_density, rng)
                                  : bitflip_mutate(pop.memory[rng.below(pop.memory.size())].genome,
                                                   cfg.refill_mutation, rng);
      a = {e.initial, std::move(g), 0, pop.next_id++};
      ++res.regrown;
    }
  }
  update_memory(pop.memory, std::move(mature), cfg.memory_size);
  return res;
}

std::size_t count_activated(std::span<const Agent> mature, const FeatureVector& v, const RabsConfig& cfg) {
  return static_cast<std::size_t>(std::count_if(mature.begin(), mature.end(), [&](const Agent& a) {
    return a.energy >= cfg.as_energy_threshold && affinity(a.genome, v) >= cfg.recognition_threshold;
  }));
}

StepRResult step_r(RPopulation& pop, const FeatureVector& v, std::size_t danger_signal, std::uint64_t now,
                   const RabsConfig& cfg, Rng& rng, std::span<const BinaryGenome> self_refs) {
  if (pop.state != PopulationState::Training) throw std::logic_error("step_r: population is consolidated");
  StepRResult res;
  if (danger_signal <= cfg.ds_threshold) {
    res.as = count_activated(pop.mature, v, cfg);
    return res;
  }
  res.exposed = true;
  pop.last_danger = now;
  const auto& e = cfg.energy;
  for (auto& a : pop.agents) {
    if (a.alive()) expose_in_place(a, v, e);
  }
  for (auto& m : pop.mature) {
    if (m.alive()) expose_in_place(m, v, e);
  }
  res.as = count_activated(pop.mature, v, cfg);

  std::unordered_set<std::uint64_t> present;
  for (const auto& m : pop.mature) present.insert(m.id);
  for (auto& a : pop.agents) {
    if (a.energy < e.mature_threshold || present.contains(a.id)) continue;
    if (!self_refs.empty() && best_affinity(a.genome, self_refs) >= cfg.insa_threshold) {
      a.energy = 0.0;
      ++res.culled;
      continue;
    }
    pop.mature.push_back(a);
  }
  res.starved = evolve(pop.agents, pop.next_id, cfg, rng).starved;
  pop.streak = res.as >= cfg.as_count_threshold ? pop.streak + 1 : 0;
  return res;
}

ReactionState evaluate_rules(std::size_t ds, std::size_t as, std::optional<std::uint64_t> as_source,
                             const RabsConfig& cfg) {
  const bool ds_hi = ds > cfg.ds_threshold;
  const bool as_hi = as >= cfg.as_count_threshold;
  if (ds_hi && as_hi) return {Reaction::FullReaction, as_source};
  if (ds_hi) return {Reaction::SoftReaction, std::nullopt};
  if (as_hi) return {Reaction::FullReactionWithInsa, as_source};
  return {Reaction::Normal, std::nullopt};
}

RPopulation spawn_r_population(std::span<const FeatureVector> recent, std::size_t lv, std::uint64_t id,
                               std::uint64_t now, const RabsConfig& cfg, Rng& rng) {
  RPopulation pop;
  pop.id = id;
  pop.created_at = now;
  pop.last_danger = now;
  pop.agents.reserve(cfg.r_size);
  for (std::size_t i = 0; i < cfg.r_size; ++i) {
    BinaryGenome g = recent.empty() ? random_genome(lv, 0.5, rng)
                                    : bitflip_mutate(recent[rng.below(recent.size())], cfg.spawn_mutation, rng);
    pop.agents.push_back({cfg.energy.initial, std::move(g), 0, pop.next_id++});
  }
  return pop;
}

bool try_consolidate(RPopulation& pop, const RabsConfig& cfg, std::uint64_t /*now*/) {
  if (pop.state != PopulationState::Training) throw std::logic_error("try_consolidate: population already consolidated");
  if (pop.mature.size() < cfg.signature_size || pop.streak < cfg.consolidate_after) return false;
  std::vector<Agent> ranked = pop.mature;
  std::sort(ranked.begin(), ranked.end(), stronger);
  pop.signature.clear();
  for (std::size_t i = 0; i < cfg.signature_size; ++i) pop.signature.push_back(ranked[i].genome);
  pop.state = PopulationState::Consolidated;
  pop.agents.clear();
  pop.agents.shrink_to_fit();
  pop.mature.clear();
  pop.mature.shrink_to_fit();
  return true;
}

std::optional<SignatureMatch> match_signatures(const FeatureVector& v, std::span<const RPopulation> pops,
                                               double threshold) {
  std::optional<SignatureMatch> best;
  for (const auto& p : pops) {
    if (p.state != PopulationState::Consolidated) continue;
    double score = 0.0;
    for (const auto& g : p.signature) score = std::max(score, affinity(g, v));
    if (score < threshold) continue;
    if (!best || score > best->score || (score == best->score && p.id < best->id)) best = SignatureMatch{p.id, score};
  }
  return best;
}

double max_reference_affinity(const NPopulation& pop, std::span<const BinaryGenome> references) {
  double best = 0.0;
  for (const auto& a : pop.agents) {
    if (a.alive()) best = std::max(best, best_affinity(a.genome, references));
  }
  for (const auto& m : pop.memory) {
    if (m.alive()) best = std::max(best, best_affinity(m.genome, references));
  }
  return best;
}

PurgeStats insa_purge(NPopulation& pop, std::span<const BinaryGenome> references, double threshold,
                      const RabsConfig& cfg, Rng& rng) {
  PurgeStats stats;
  if (references.empty()) return stats;
  auto harmful = [&](const Agent& a) { return best_affinity(a.genome, references) >= threshold; };

  const auto mem_end = std::remove_if(pop.memory.begin(), pop.memory.end(), harmful);
  stats.removed_memory = static_cast<std::size_t>(pop.memory.end() - mem_end);
  pop.memory.erase(mem_end, pop.memory.end());

  const auto end = std::remove_if(pop.agents.begin(), pop.agents.end(), harmful);
  stats.removed_agents = static_cast<std::size_t>(pop.agents.end() - end);
  pop.agents.erase(end, pop.agents.end());
  if (stats.removed_agents == 0 && pop.agents.size() == cfg.n_size) return stats;

  const std::size_t lv = references.front().size();
  if (pop.agents.empty()) {
    stats.catastrophic = true;
    while (pop.agents.size() < cfg.n_size) {
      auto g = random_genome(lv, cfg.init_density, rng);
      if (best_affinity(g, references) >= threshold) continue;
      pop.agents.push_back({cfg.energy.initial, std::move(g), 0, pop.next_id++});
    }
    return stats;
  }

  std::vector<Agent> donors = pop.agents;
  std::sort(donors.begin(), donors.end(), stronger);
  for (std::size_t i = 0; pop.agents.size() < cfg.n_size; ++i) {
    const auto& src = donors[i % donors.size()];
    auto g = bitflip_mutate(src.genome, cfg.refill_mutation, rng);
    // A mutated clone may drift into the excluded region; fall back to the unmutated survivor.
    if (best_affinity(g, references) >= threshold) g = src.genome;
    pop.agents.push_back({cfg.energy.initial, std::move(g), 0, pop.next_id++});
  }
  return stats;
}

std::uint64_t inject_signature(EngineState& state, std::vector<BinaryGenome> signature) {
  if (signature.empty() || signature.size() > state.config.signature_size) {
    throw std::invalid_argument("inject_signature: signature needs 1.." + std::to_string(state.config.signature_size) +
                                " genomes");
  }
  for (const auto& g : signature) {
    if (g.size() != state.spec.lv()) throw std::invalid_argument("inject_signature: genome length mismatch");
  }
  RPopulation pop;
  pop.id = state.next_population_id++;
  pop.state = PopulationState::Consolidated;
  pop.signature = std::move(signature);
  pop.created_at = state.packets_seen;
  pop.last_danger = state.packets_seen;
  state.rpops.push_back(std::move(pop));
  return state.rpops.back().id;
}

RabsEngine::RabsEngine(RabsConfig config, FeatureSpec spec, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  auto npop = NPopulation::random(spec.lv(), config, rng);
  state_.emplace(EngineState{std::move(config), std::move(spec), rng, std::move(npop), {}, {}, 0, 0, {}, {}});
}

RabsEngine::RabsEngine(EngineState state) {
  state.config.validate();
  state_.emplace(std::move(state));
}

EngineState& RabsEngine::require() {
  if (!state_) throw std::logic_error("RabsEngine: engine not initialized");
  return *state_;
}

const EngineState& RabsEngine::state() const {
  if (!state_) throw std::logic_error("RabsEngine: engine not initialized");
  return *state_;
}

EngineState& RabsEngine::mutable_state() { return require(); }

std::vector<const RPopulation*> RabsEngine::consolidated() const {
  std::vector<const RPopulation*> out;
  for (const auto& p : state().rpops) {
    if (p.state == PopulationState::Consolidated) out.push_back(&p);
  }
  return out;
}

const RPopulation* RabsEngine::training() const {
  for (const auto& p : state().rpops) {
    if (p.state == PopulationState::Training) return &p;
  }
  return nullptr;
}

PacketOutcome RabsEngine::process(const PacketRecord& p) {
  auto& s = require();
  return process_vector(featurize(p, s.spec));
}

PacketOutcome RabsEngine::process_vector(const FeatureVector& v) {
  auto& s = require();
  if (v.size() != s.spec.lv()) throw std::invalid_argument("RabsEngine: feature vector length mismatch");
  const auto& cfg = s.config;
  const std::uint64_t now = s.packets_seen;
  PacketOutcome out;
  out.seq_no = now;

  s.recent.push_back(v);
  while (s.recent.size() > cfg.seed_window) s.recent.pop_front();

  if (auto hit = match_signatures(v, s.rpops, cfg.recognition_threshold)) {
    // Secondary response: the packet is a known threat, the self population is left alone.
    const auto it = std::find_if(s.rpops.begin(), s.rpops.end(), [&](const RPopulation& p) { return p.id == hit->id; });
    std::size_t as = 0;
    for (const auto& g : it->signature) {
      if (affinity(g, v) >= cfg.recognition_threshold) ++as;
    }
    const auto ds = static_cast<std::size_t>(std::count_if(s.npop.memory.begin(), s.npop.memory.end(), [&](const Agent& m) {
      return m.energy < cfg.energy.fit_threshold;
    }));
    out.signals = {ds, as, hit->id};
    if (ds > cfg.ds_threshold) {
      out.reaction = {Reaction::FullReaction, hit->id};
    } else {
      out.reaction = {Reaction::FullReactionWithInsa, hit->id};
      auto ps = insa_purge(s.npop, it->signature, cfg.insa_threshold, cfg, s.rng);
      if (ps.removed_agents + ps.removed_memory > 0) ++s.counters.purges;
      if (ps.catastrophic) ++s.counters.catastrophic_purges;
    }
    out.verdict = {Prediction::Attack, hit->id};
    out.fast_path = true;
  } else {
    auto n = step_n(s.npop, v, s.last_signals.as, cfg, s.rng);
    if (n.starved) ++s.counters.starvations;
    s.counters.regrown += n.regrown;

    std::size_t as = 0;
    std::optional<std::uint64_t> source;
    std::vector<BinaryGenome> self_refs;
    for (const auto& m : s.npop.memory) self_refs.push_back(m.genome);
    for (auto& pop : s.rpops) {
      if (pop.state != PopulationState::Training) continue;
      auto r = step_r(pop, v, n.ds, now, cfg, s.rng, self_refs);
      s.counters.culled += r.culled;
      if (r.as > as) {
        as = r.as;
        source = pop.id;
      }
    }
    out.signals = {n.ds, as, source};
    out.reaction = evaluate_rules(n.ds, as, source, cfg);

    if (out.reaction.kind == Reaction::SoftReaction && training() == nullptr) {
      std::vector<FeatureVector> window(s.recent.begin(), s.recent.end());
      s.rpops.push_back(spawn_r_population(window, s.spec.lv(), s.next_population_id++, now, cfg, s.rng));
      ++s.counters.spawned;
    }
    if (out.reaction.kind == Reaction::FullReactionWithInsa) {
      const auto it = std::find_if(s.rpops.begin(), s.rpops.end(), [&](const RPopulation& p) { return p.id == *source; });
      std::vector<BinaryGenome> refs;
      for (const auto& m : it->mature) {
        if (m.energy >= cfg.as_energy_threshold && affinity(m.genome, v) >= cfg.recognition_threshold) {
          refs.push_back(m.genome);
        }
      }
      auto ps = insa_purge(s.npop, refs, cfg.insa_threshold, cfg, s.rng);
      if (ps.removed_agents + ps.removed_memory > 0) ++s.counters.purges;
      if (ps.catastrophic) ++s.counters.catastrophic_purges;
    }
    for (auto& pop : s.rpops) {
      if (pop.state == PopulationState::Training && try_consolidate(pop, cfg, now)) ++s.counters.consolidated;
    }
    const auto stale = std::remove_if(s.rpops.begin(), s.rpops.end(), [&](const RPopulation& p) {
      return p.state == PopulationState::Training && now - p.last_danger >= cfg.stale_after;
    });
    s.counters.collected += static_cast<std::uint64_t>(s.rpops.end() - stale);
    s.rpops.erase(stale, s.rpops.end());

    if (out.reaction.kind == Reaction::Normal) {
      out.verdict = {Prediction::Normal, std::nullopt};
    } else {
      const bool specific = out.reaction.kind != Reaction::SoftReaction;
      out.verdict = {Prediction::Attack, specific ? out.reaction.population : std::nullopt};
    }
  }
  out.active_populations = s.rpops.size();
  s.last_signals = out.signals;
  ++s.packets_seen;
  return out;
}

}  // namespace rabs::reactive
