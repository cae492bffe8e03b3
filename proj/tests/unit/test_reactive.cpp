#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "rabs/features.hpp"
#include "rabs/harness.hpp"
#include "rabs/reactive.hpp"
#include "rabs/synth.hpp"

using namespace rabs;
using namespace rabs::reactive;

namespace {

std::vector<std::string> genomes_of(const std::vector<Agent>& agents) {
  std::vector<std::string> out;
  for (const auto& a : agents) out.push_back(a.genome.to_string());
  std::sort(out.begin(), out.end());
  return out;
}

Agent agent(double energy, BinaryGenome g, std::uint64_t id = 0) { return {energy, std::move(g), 0, id}; }

std::vector<FeatureVector> featurized(const std::vector<PacketRecord>& trace) {
  std::vector<FeatureVector> out;
  for (const auto& p : trace) out.push_back(featurize(p, FeatureSpec::default_spec()));
  return out;
}

std::vector<PacketRecord> land_trace(std::uint64_t seed) {
  return harness::make_trace(synth::standard_script(synth::ScriptKind::FourPhase, "dos-land-like"),
                             synth::default_profiles(), seed);
}

}  // namespace

TEST(StepN, DangerSignalCountsStarvingMemory) {
  RabsConfig cfg;
  cfg.energy.break_even = 1.0;  // perfect matches leave energy unchanged
  Rng rng(1);
  const auto v = BitVector::from_string("1010");
  NPopulation pop;
  pop.agents.push_back(agent(80.0, v, 0));
  pop.memory = {agent(50.0, v, 1), agent(70.0, v, 2), agent(40.0, v, 3)};
  cfg.n_size = 1;
  const auto res = step_n(pop, v, cfg.as_count_threshold, cfg, rng);
  EXPECT_EQ(res.ds, 2U);
}

TEST(StepN, InhibitionFreezesGenomes) {
  RabsConfig cfg;
  Rng rng(2);
  auto pop = NPopulation::random(39, cfg, rng);
  const auto vs = featurized(land_trace(2));
  for (std::size_t i = 0; i < 200; ++i) step_n(pop, vs[i], 0, cfg, rng);
  const auto agents = genomes_of(pop.agents);
  const auto memory = genomes_of(pop.memory);
  const auto res = step_n(pop, vs[3000], cfg.as_count_threshold, cfg, rng);
  EXPECT_TRUE(res.inhibited);
  EXPECT_EQ(res.births, 0U);
  EXPECT_EQ(genomes_of(pop.agents), agents);
  EXPECT_EQ(genomes_of(pop.memory), memory);
}

TEST(StepN, ReplacementCountIsMaxOfDeadAndProportion) {
  RabsConfig cfg;
  cfg.n_size = 100;
  cfg.reproduction_rate = 0.1;
  cfg.energy.break_even = 0.0;  // exposure only adds energy
  Rng rng(3);
  NPopulation pop;
  for (std::uint64_t i = 0; i < 100; ++i) pop.agents.push_back(agent(i < 3 ? 0.0 : 70.0, BitVector(8), i));
  pop.next_id = 100;
  const auto res = step_n(pop, BitVector(8), 0, cfg, rng);
  EXPECT_EQ(res.deaths, 3U);
  EXPECT_EQ(res.births, 10U);
  EXPECT_EQ(pop.agents.size(), 100U);
}

TEST(StepN, SizeConstantAndMemoryAdmission) {
  RabsConfig cfg;
  Rng rng(4);
  auto pop = NPopulation::random(39, cfg, rng);
  const auto vs = featurized(land_trace(4));
  for (std::size_t i = 0; i < 2000; ++i) {
    step_n(pop, vs[i], 0, cfg, rng);
    ASSERT_EQ(pop.agents.size(), cfg.n_size);
    ASSERT_LE(pop.memory.size(), cfg.memory_size);
  }
  EXPECT_EQ(pop.memory.size(), cfg.memory_size);
}

TEST(StepR, NoDangerLeavesPopulationUntouched) {
  RabsConfig cfg;
  cfg.ds_threshold = 5;
  Rng rng(5);
  const std::vector<FeatureVector> recent{BitVector::from_string("1100")};
  auto pop = spawn_r_population(recent, 4, 0, 0, cfg, rng);
  const auto before = pop.agents;
  const auto res = step_r(pop, BitVector::from_string("1100"), 0, 1, cfg, rng);
  EXPECT_FALSE(res.exposed);
  ASSERT_EQ(pop.agents.size(), before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(pop.agents[i].energy, before[i].energy);
    EXPECT_EQ(pop.agents[i].genome, before[i].genome);
  }
  EXPECT_TRUE(pop.mature.empty());
}

TEST(StepR, AttackSignalCountsEnergeticMature) {
  RabsConfig cfg;
  const auto v = BitVector::from_string("1100");
  const std::vector<Agent> mature{agent(95.0, v, 0), agent(85.0, v, 1)};
  EXPECT_EQ(count_activated(mature, v, cfg), 1U);
}

TEST(StepR, MatureSetGrowsMonotonically) {
  RabsConfig cfg;
  Rng rng(6);
  const auto vs = featurized(land_trace(6));
  std::vector<FeatureVector> recent(vs.begin() + 2000, vs.begin() + 2025);
  auto pop = spawn_r_population(recent, 39, 0, 2000, cfg, rng);
  std::vector<std::uint64_t> seen;
  for (std::size_t i = 2000; i < 2300; ++i) {
    step_r(pop, vs[i], cfg.ds_threshold + 1, i, cfg, rng);
    std::vector<std::uint64_t> ids;
    for (const auto& m : pop.mature) ids.push_back(m.id);
    ASSERT_GE(ids.size(), seen.size());
    EXPECT_TRUE(std::equal(seen.begin(), seen.end(), ids.begin()));
    seen = ids;
  }
  EXPECT_FALSE(seen.empty());
}

TEST(StepR, SelfToleranceCullsMaturingSelfAgents) {
  RabsConfig cfg;
  Rng rng(7);
  const auto v = BitVector::from_string("1100110011");
  RPopulation pop;
  pop.agents.push_back(agent(cfg.energy.mature_threshold, v, 0));
  pop.next_id = 1;
  const std::vector<BinaryGenome> self{v};
  const auto res = step_r(pop, v, cfg.ds_threshold + 1, 1, cfg, rng, self);
  EXPECT_EQ(res.culled, 1U);
  EXPECT_TRUE(pop.mature.empty());
}

TEST(StepR, ConsolidatedRejected) {
  RabsConfig cfg;
  Rng rng(1);
  RPopulation pop;
  pop.state = PopulationState::Consolidated;
  EXPECT_THROW(step_r(pop, BitVector(4), 99, 0, cfg, rng), std::logic_error);
}

TEST(Rules, Examples) {
  RabsConfig cfg;
  cfg.ds_threshold = 5;
  cfg.as_count_threshold = 3;
  EXPECT_EQ(evaluate_rules(10, 5, 7, cfg), (ReactionState{Reaction::FullReaction, 7}));
  EXPECT_EQ(evaluate_rules(10, 0, std::nullopt, cfg).kind, Reaction::SoftReaction);
  EXPECT_EQ(evaluate_rules(0, 5, 2, cfg), (ReactionState{Reaction::FullReactionWithInsa, 2}));
  EXPECT_EQ(evaluate_rules(0, 0, std::nullopt, cfg).kind, Reaction::Normal);
}

TEST(Rules, TotalOverGrid) {
  RabsConfig cfg;
  for (std::size_t ds = 0; ds <= 100; ++ds) {
    for (std::size_t as = 0; as <= 100; ++as) {
      const auto r = evaluate_rules(ds, as, as > 0 ? std::optional<std::uint64_t>(1) : std::nullopt, cfg);
      const bool ds_hi = ds > cfg.ds_threshold;
      const bool as_hi = as >= cfg.as_count_threshold;
      const int fired = (ds_hi && as_hi) + (ds_hi && !as_hi) + (!ds_hi && as_hi) + (!ds_hi && !as_hi);
      ASSERT_EQ(fired, 1);
      const auto expected = ds_hi ? (as_hi ? Reaction::FullReaction : Reaction::SoftReaction)
                                  : (as_hi ? Reaction::FullReactionWithInsa : Reaction::Normal);
      ASSERT_EQ(r.kind, expected) << ds << "," << as;
    }
  }
}

TEST(Spawn, SingleVectorNoMutation) {
  RabsConfig cfg;
  cfg.spawn_mutation = 0.0;
  Rng rng(8);
  const auto v = BitVector::from_string("101100111000");
  const std::vector<FeatureVector> recent{v};
  const auto pop = spawn_r_population(recent, v.size(), 3, 10, cfg, rng);
  EXPECT_EQ(pop.agents.size(), cfg.r_size);
  for (const auto& a : pop.agents) {
    EXPECT_EQ(a.genome, v);
    EXPECT_EQ(a.energy, cfg.energy.initial);
  }
  EXPECT_EQ(pop.state, PopulationState::Training);
  EXPECT_TRUE(pop.mature.empty());
  EXPECT_EQ(pop.id, 3U);
}

TEST(Spawn, EmptyWindowIsUniformRandom) {
  RabsConfig cfg;
  cfg.r_size = 400;
  Rng rng(9);
  const auto pop = spawn_r_population({}, 39, 0, 0, cfg, rng);
  std::size_t ones = 0;
  for (const auto& a : pop.agents) ones += a.genome.count();
  const double density = static_cast<double>(ones) / (400.0 * 39.0);
  EXPECT_NEAR(density, 0.5, 0.02);
}

TEST(Spawn, Deterministic) {
  RabsConfig cfg;
  const std::vector<FeatureVector> recent{BitVector::from_string("1100"), BitVector::from_string("0011")};
  Rng a(10);
  Rng b(10);
  const auto p = spawn_r_population(recent, 4, 0, 0, cfg, a);
  const auto q = spawn_r_population(recent, 4, 0, 0, cfg, b);
  EXPECT_EQ(genomes_of(p.agents), genomes_of(q.agents));
}

TEST(Consolidate, Boundaries) {
  RabsConfig cfg;
  RPopulation pop;
  for (std::uint64_t i = 0; i + 1 < cfg.signature_size; ++i) pop.mature.push_back(agent(95.0, BitVector(4), i));
  pop.streak = cfg.consolidate_after;
  EXPECT_FALSE(try_consolidate(pop, cfg, 0));
  EXPECT_EQ(pop.state, PopulationState::Training);

  pop.mature.push_back(agent(99.0, BitVector::from_string("1111"), 9));
  EXPECT_TRUE(try_consolidate(pop, cfg, 0));
  EXPECT_EQ(pop.state, PopulationState::Consolidated);
  EXPECT_EQ(pop.signature.size(), cfg.signature_size);
  EXPECT_EQ(pop.signature.front().to_string(), "1111");
  EXPECT_TRUE(pop.agents.empty());
  EXPECT_TRUE(pop.mature.empty());
  EXPECT_THROW(try_consolidate(pop, cfg, 0), std::logic_error);
}

TEST(Consolidate, NeedsStreak) {
  RabsConfig cfg;
  RPopulation pop;
  for (std::uint64_t i = 0; i < cfg.signature_size; ++i) pop.mature.push_back(agent(95.0, BitVector(4), i));
  pop.streak = cfg.consolidate_after - 1;
  EXPECT_FALSE(try_consolidate(pop, cfg, 0));
}

TEST(Signatures, Matching) {
  const auto s = BitVector::from_string("1111000000");
  EXPECT_FALSE(match_signatures(s, {}, 0.9).has_value());

  std::vector<RPopulation> pops(2);
  pops[0].id = 4;
  pops[1].id = 2;
  for (auto& p : pops) p.state = PopulationState::Consolidated;
  pops[0].signature = {s};
  pops[1].signature = {BitVector::from_string("0000001111")};
  const auto m = match_signatures(s, pops, 0.9);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->id, 4U);
  EXPECT_DOUBLE_EQ(m->score, 1.0);

  // Both at equal score: lower id wins.
  pops[1].signature = {s};
  EXPECT_EQ(match_signatures(s, pops, 0.9)->id, 2U);
  EXPECT_FALSE(match_signatures(s.complement(), pops, 0.9).has_value());
}

TEST(Purge, NothingCloseIsNoop) {
  RabsConfig cfg;
  cfg.n_size = 3;
  Rng rng(11);
  NPopulation pop;
  for (std::uint64_t i = 0; i < 3; ++i) pop.agents.push_back(agent(60.0, BitVector::from_string("0000000000"), i));
  const std::vector<BinaryGenome> sig{BitVector::from_string("1111111111")};
  const auto before = genomes_of(pop.agents);
  const auto st = insa_purge(pop, sig, 0.9, cfg, rng);
  EXPECT_EQ(st.removed_agents, 0U);
  EXPECT_EQ(genomes_of(pop.agents), before);
}

TEST(Purge, ExactMatchRemovedAndPostcondition) {
  RabsConfig cfg;
  cfg.n_size = 4;
  Rng rng(12);
  const auto sig = BitVector::from_string("1111100000");
  NPopulation pop;
  pop.agents = {agent(90.0, sig, 0), agent(60.0, BitVector::from_string("0000011111"), 1),
                agent(70.0, BitVector::from_string("0000000000"), 2), agent(55.0, BitVector::from_string("1111000000"), 3)};
  pop.memory = {agent(95.0, sig, 4)};
  pop.next_id = 5;
  const std::vector<BinaryGenome> refs{sig};
  const auto st = insa_purge(pop, refs, 0.9, cfg, rng);
  EXPECT_EQ(st.removed_agents, 2U);  // exact match plus the 0.9-affinity neighbour
  EXPECT_EQ(st.removed_memory, 1U);
  EXPECT_EQ(pop.agents.size(), cfg.n_size);
  EXPECT_TRUE(pop.memory.empty());
  for (const auto& a : pop.agents) EXPECT_NE(a.id, 0U);
  EXPECT_LT(max_reference_affinity(pop, refs), 0.9);
}

TEST(Purge, NoSurvivorsIsCatastrophic) {
  RabsConfig cfg;
  cfg.n_size = 10;
  Rng rng(13);
  const auto sig = BitVector::from_string("1010101010");
  NPopulation pop;
  for (std::uint64_t i = 0; i < 10; ++i) pop.agents.push_back(agent(60.0, sig, i));
  const std::vector<BinaryGenome> refs{sig};
  const auto st = insa_purge(pop, refs, 0.9, cfg, rng);
  EXPECT_TRUE(st.catastrophic);
  EXPECT_EQ(pop.agents.size(), 10U);
  EXPECT_LT(max_reference_affinity(pop, refs), 0.9);
}

TEST(Engine, UninitializedThrows) {
  RabsEngine e;
  EXPECT_FALSE(e.initialized());
  EXPECT_THROW(e.process_vector(BitVector(39)), std::logic_error);
}

TEST(Engine, FastPathOnInjectedSignature) {
  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 1);
  Rng rng(1);
  const auto p = synth::gen_segment(synth::default_profiles().at("dos-land-like"), 1, rng).front();
  const auto v = featurize(p, FeatureSpec::default_spec());
  const auto id = inject_signature(e.mutable_state(), {v});
  const auto out = e.process_vector(v);
  EXPECT_TRUE(out.fast_path);
  EXPECT_EQ(out.verdict.prediction, Prediction::Attack);
  EXPECT_EQ(out.verdict.attack_id, id);
}

TEST(Engine, InjectorValidates) {
  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 1);
  EXPECT_THROW(inject_signature(e.mutable_state(), {}), std::invalid_argument);
  EXPECT_THROW(inject_signature(e.mutable_state(), {BitVector(5)}), std::invalid_argument);
  EXPECT_THROW(inject_signature(e.mutable_state(), std::vector<BinaryGenome>(6, BitVector(39))), std::invalid_argument);
}

TEST(Engine, NormalTrafficMostlyNormal) {
  const auto& normal = synth::default_profiles().at("normal");
  Rng rng(14);
  const auto trace = synth::gen_segment(normal, 3000, rng);
  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 14);
  std::size_t normal_verdicts = 0;
  for (const auto& p : trace) normal_verdicts += e.process(p).verdict.prediction == Prediction::Normal;
  EXPECT_GE(static_cast<double>(normal_verdicts) / 3000.0, 0.9);
}

TEST(Engine, EngineInhibitionAndConsolidatedImmutability) {
  const auto trace = land_trace(15);
  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 15);
  std::map<std::uint64_t, std::vector<std::string>> signatures;
  std::size_t inhibited_steps = 0;
  for (const auto& p : trace) {
    const auto agents = genomes_of(e.state().npop.agents);
    const auto memory = genomes_of(e.state().npop.memory);
    const auto purges = e.state().counters.purges;
    const auto out = e.process(p);
    if (out.fast_path || out.signals.as >= e.state().config.as_count_threshold) {
      // A purge is the only permitted mutation of self while the attack signal is high.
      if (e.state().counters.purges == purges) {
        ++inhibited_steps;
        ASSERT_EQ(genomes_of(e.state().npop.agents), agents) << "packet " << p.seq_no;
        ASSERT_EQ(genomes_of(e.state().npop.memory), memory) << "packet " << p.seq_no;
      }
    }
    for (const auto* c : e.consolidated()) {
      std::vector<std::string> sig;
      for (const auto& g : c->signature) sig.push_back(g.to_string());
      auto [it, fresh] = signatures.emplace(c->id, sig);
      if (!fresh) ASSERT_EQ(it->second, sig);
    }
  }
  EXPECT_GT(inhibited_steps, 0U);
  EXPECT_FALSE(signatures.empty());
}

TEST(Engine, Deterministic) {
  const auto trace = land_trace(16);
  auto run = [&] {
    RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 16);
    std::vector<Verdict> v;
    for (const auto& p : trace) v.push_back(e.process(p).verdict);
    return v;
  };
  EXPECT_EQ(run(), run());
}
