#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rabs/abs.hpp"
#include "rabs/features.hpp"
#include "rabs/reactive.hpp"
#include "rabs/synth.hpp"

namespace rabs::harness {

enum class Model : std::uint8_t { Abs, Rabs };

std::string_view model_name(Model m);
Model parse_model(std::string_view name);

/// Per-packet confusion counts. Reals so that cross-run means stay representable.
struct ConfusionMatrix {
  double tp = 0.0;
  double fn = 0.0;
  double tn = 0.0;
  double fp = 0.0;

  void record(bool actual_attack, Prediction predicted);
  double attacks() const { return tp + fn; }
  double normals() const { return tn + fp; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct SensSpec {
  double sens = 0.0;
  double spec = 0.0;
};

/// Throws std::domain_error naming the empty denominator (TP+FN or TN+FP).
SensSpec sens_spec(const ConfusionMatrix& m);
double sensitivity(const ConfusionMatrix& m);
double specificity(const ConfusionMatrix& m);

/// Everything the models need besides the script and the seed.
struct ExperimentSetup {
  reactive::RabsConfig rabs;
  abs::AbsParams abs;
  EnergyParams abs_energy;
  FeatureSpec spec = FeatureSpec::default_spec();
  synth::ProfileSet profiles = synth::default_profiles();
  /// Leading fraction of phase 1 the ABS observer ignores before collecting calibration means.
  double abs_burn_in = 0.5;

  void validate() const;
};

/// Contiguous run of packets with one label.
struct Span {
  Label label;
  std::size_t start = 0;
  std::size_t length = 0;
};

std::vector<Span> label_runs(std::span<const PacketRecord> trace);

struct Exposure {
  std::string attack;
  /// 1 for the first segment of this attack in the trace, 2 for the second, ...
  std::size_t occurrence = 0;
  std::size_t start = 0;
  std::size_t length = 0;
  /// 1-based index within the segment of the first Attack verdict.
  std::optional<std::size_t> reaction_time;
};

struct VerdictRecord {
  std::uint64_t seq_no = 0;
  bool actual_attack = false;
  Prediction predicted = Prediction::Normal;
  friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

struct RunResult {
  Model model = Model::Rabs;
  std::string script;
  std::size_t phases = 0;
  std::uint64_t seed = 0;
  ConfusionMatrix matrix;
  std::vector<Exposure> exposures;
  /// Packets classified by the model; ABS calibration packets are absent.
  std::vector<VerdictRecord> verdict_log;
  /// Leading packets excluded from the matrix (the ABS calibration phase).
  std::size_t excluded = 0;
  std::optional<reactive::EngineCounters> counters;
};

/// Seed stream used to generate the trace for a replica; the model draws from another stream.
std::uint64_t trace_seed(std::uint64_t seed);
std::uint64_t model_seed(std::uint64_t seed);

std::vector<PacketRecord> make_trace(const synth::PhaseScript& script, const synth::ProfileSet& profiles,
                                     std::uint64_t seed);

/// Feeds an existing trace to one model. `calibration` is the length of phase 1
/// (the ABS observer calibrates on it; R-ABS classifies from packet 0).
RunResult run_trace(Model model, std::span<const PacketRecord> trace, std::size_t calibration,
                    const ExperimentSetup& setup, std::uint64_t seed);

/// Generates the trace for `seed` and runs it. Throws std::invalid_argument on a bad setup.
RunResult run_experiment(Model model, const synth::PhaseScript& script, const ExperimentSetup& setup,
                         std::uint64_t seed, std::string script_name = {});

/// Seeds base_seed .. base_seed+replicates-1, run on up to `jobs` threads. Results are seed-ordered.
std::vector<RunResult> run_replicas(Model model, const synth::PhaseScript& script, const ExperimentSetup& setup,
                                    std::uint64_t base_seed, std::size_t replicates, std::size_t jobs,
                                    std::string script_name = {});

struct ReactionSummary {
  std::string attack;
  std::size_t occurrence = 0;
  std::size_t runs = 0;
  std::size_t detected = 0;
  /// Over detecting runs only; absent when no run detected the attack.
  std::optional<double> mean;
  std::optional<double> median;

  double detection_rate() const { return runs == 0 ? 0.0 : static_cast<double>(detected) / static_cast<double>(runs); }
};

struct Summary {
  std::size_t runs = 0;
  ConfusionMatrix mean_matrix;
  std::optional<double> sens;
  std::optional<double> spec;
  std::vector<ReactionSummary> reactions;
};

/// Elementwise mean matrix and per-exposure reaction statistics. Throws on empty input.
Summary aggregate(std::span<const RunResult> results);

/// "no" when absent, otherwise the value with one decimal.
std::string format_reaction(const std::optional<double>& t);

/// Confusion matrix in Actual x Predicted layout followed by Sens/Spec.
std::string format_table(const Summary& s, std::string_view title);

struct ResultSet {
  std::vector<RunResult> runs;
  Summary summary;
};

std::string results_json(std::span<const ResultSet> sets);
/// Header: model,phases,seed,sens,spec,attack,reaction_time. One row per attack exposure.
std::string results_csv(std::span<const ResultSet> sets);

}  // namespace rabs::harness
