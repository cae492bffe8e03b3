#include <benchmark/benchmark.h>

#include "rabs/abs.hpp"
#include "rabs/features.hpp"
#include "rabs/genetics.hpp"
#include "rabs/harness.hpp"
#include "rabs/reactive.hpp"
#include "rabs/synth.hpp"

using namespace rabs;

namespace {

std::vector<FeatureVector> sample_vectors(std::size_t n) {
  const auto script = synth::standard_script(synth::ScriptKind::TwoPhase, "dos-land-like");
  const auto trace = harness::make_trace(script, synth::default_profiles(), 7);
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i < n && i < trace.size(); ++i) out.push_back(featurize(trace[i], FeatureSpec::default_spec()));
  return out;
}

void BM_Affinity(benchmark::State& st) {
  Rng rng(1);
  const auto g = random_genome(39, 0.5, rng);
  const auto v = random_genome(39, 0.5, rng);
  for (auto _ : st) benchmark::DoNotOptimize(affinity(g, v));
}
BENCHMARK(BM_Affinity);

void BM_StepN(benchmark::State& st) {
  reactive::RabsConfig cfg;
  Rng rng(2);
  auto pop = reactive::NPopulation::random(39, cfg, rng);
  const auto vs = sample_vectors(2000);
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(reactive::step_n(pop, vs[i], 0, cfg, rng));
    i = (i + 1) % vs.size();
  }
}
BENCHMARK(BM_StepN);

void BM_EnginePerPacket(benchmark::State& st) {
  const auto script = synth::standard_script(synth::ScriptKind::FourPhase, "dos-land-like");
  const auto trace = harness::make_trace(script, synth::default_profiles(), 3);
  reactive::RabsEngine engine(reactive::RabsConfig{}, FeatureSpec::default_spec(), 3);
  std::size_t i = 0;
  for (auto _ : st) {
    if (i == trace.size()) {
      st.PauseTiming();
      engine = reactive::RabsEngine(reactive::RabsConfig{}, FeatureSpec::default_spec(), 3);
      i = 0;
      st.ResumeTiming();
    }
    benchmark::DoNotOptimize(engine.process(trace[i++]));
  }
}
BENCHMARK(BM_EnginePerPacket);

void BM_AbsStep(benchmark::State& st) {
  abs::AbsParams params;
  EnergyParams energy;
  Rng rng(4);
  auto pop = abs::AbsPopulation::random(39, params, energy, rng);
  const auto vs = sample_vectors(2000);
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(abs::abs_step(pop, vs[i], params, energy, rng));
    i = (i + 1) % vs.size();
  }
}
BENCHMARK(BM_AbsStep);

}  // namespace
BENCHMARK_MAIN();
