// rabs: command-line front end for trace generation, featurization, experiments and snapshots.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rabs/config.hpp"
#include "rabs/features.hpp"
#include "rabs/harness.hpp"
#include "rabs/reactive.hpp"
#include "rabs/snapshot.hpp"
#include "rabs/synth.hpp"

namespace fs = std::filesystem;
using namespace rabs;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t jobs = 0;
  std::string format;
};

ExperimentConfig load(const Common& c) {
  auto cfg = c.config.empty() ? default_config() : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<PacketRecord> trace_for(const ExperimentConfig& cfg, const std::string& trace_path) {
  if (!trace_path.empty()) return load_trace(trace_path);
  return harness::make_trace(cfg.script, cfg.setup.profiles, cfg.seed);
}

std::string event_log(std::span<const reactive::PacketOutcome> outcomes, std::span<const PacketRecord> trace) {
  std::ostringstream os;
  os << "# seq_no\tactual\tpredicted\tattack_id\tDS\tAS\treaction\tactive_populations\n";
  for (const auto& o : outcomes) {
    const auto& p = trace[o.seq_no];
    os << o.seq_no << '\t' << p.label.to_string() << '\t'
       << (o.verdict.prediction == Prediction::Attack ? "attack" : "normal") << '\t'
       << (o.verdict.attack_id ? std::to_string(*o.verdict.attack_id) : std::string("-")) << '\t' << o.signals.ds
       << '\t' << o.signals.as << '\t' << reactive::reaction_name(o.reaction.kind) << '\t' << o.active_populations
       << '\n';
  }
  return os.str();
}

int cmd_synth(const Common& c) {
  const auto cfg = load(c);
  const auto trace = harness::make_trace(cfg.script, cfg.setup.profiles, cfg.seed);
  const auto path = cfg.out_dir / "trace.tsv";
  fs::create_directories(cfg.out_dir);
  save_trace(trace, path);
  std::cout << "wrote " << trace.size() << " records to " << path.string() << "\n";
  return 0;
}

int cmd_featurize(const Common& c, const std::string& trace_path, const std::string& spec_path) {
  if (trace_path.empty()) throw UsageError("featurize needs --trace");
  const auto spec = spec_path.empty() ? FeatureSpec::default_spec() : load_feature_spec(spec_path);
  const auto trace = load_trace(trace_path);
  std::ostringstream os;
  for (const auto& p : trace) os << p.seq_no << '\t' << featurize(p, spec).to_string() << '\n';
  if (c.out.empty()) {
    std::cout << os.str();
  } else {
    write_text(fs::path(c.out) / "features.txt", os.str());
  }
  return 0;
}

std::vector<harness::ResultSet> run_suite(const ExperimentConfig& cfg, std::size_t jobs) {
  std::vector<harness::ResultSet> sets;
  for (const auto& [name, profile] : cfg.setup.profiles) {
    if (!profile.label.attack) continue;
    for (auto kind : {synth::ScriptKind::Baseline, synth::ScriptKind::TwoPhase, synth::ScriptKind::ThreePhase,
                      synth::ScriptKind::FourPhase}) {
      const auto script = synth::standard_script(kind, name);
      const auto label = std::string(synth::script_kind_name(kind)) + ":" + name;
      for (auto model : cfg.models) {
        auto runs = harness::run_replicas(model, script, cfg.setup, cfg.seed, cfg.replicates, jobs, label);
        auto summary = harness::aggregate(runs);
        sets.push_back({std::move(runs), std::move(summary)});
      }
    }
  }
  return sets;
}

int cmd_run(const Common& c, bool suite, const std::string& trace_path) {
  if (!c.format.empty() && c.format != "csv" && c.format != "json") throw UsageError("--format must be csv or json");
  const auto cfg = load(c);
  const auto jobs = resolve_jobs(c.jobs);
  std::vector<harness::ResultSet> sets;
  if (suite) {
    sets = run_suite(cfg, jobs);
  } else if (!trace_path.empty()) {
    const auto trace = load_trace(trace_path);
    const auto runs = harness::label_runs(trace);
    if (runs.empty()) throw std::runtime_error("trace " + trace_path + " is empty");
    for (auto model : cfg.models) {
      auto r = harness::run_trace(model, trace, runs.front().length, cfg.setup, cfg.seed);
      r.script = fs::path(trace_path).filename().string();
      r.phases = runs.size();
      std::vector<harness::RunResult> one{std::move(r)};
      auto summary = harness::aggregate(one);
      sets.push_back({std::move(one), std::move(summary)});
    }
  } else {
    for (auto model : cfg.models) {
      auto runs = harness::run_replicas(model, cfg.script, cfg.setup, cfg.seed, cfg.replicates, jobs, cfg.script_name);
      auto summary = harness::aggregate(runs);
      sets.push_back({std::move(runs), std::move(summary)});
    }
  }
  for (const auto& s : sets) {
    const auto& front = s.runs.front();
    std::cout << harness::format_table(s.summary, std::string(harness::model_name(front.model)) + " " + front.script)
              << "\n";
  }
  if (c.format.empty() || c.format == "json") write_text(cfg.out_dir / "results.json", harness::results_json(sets));
  if (c.format.empty() || c.format == "csv") write_text(cfg.out_dir / "results.csv", harness::results_csv(sets));
  std::cout << "results in " << cfg.out_dir.string() << "\n";
  return 0;
}

int cmd_snapshot(const Common& c, const std::string& trace_path, std::optional<std::size_t> at,
                 const std::string& resume) {
  const auto cfg = load(c);
  const auto trace = trace_for(cfg, trace_path);
  reactive::RabsEngine engine;
  std::size_t start = 0;
  if (!resume.empty()) {
    engine = reactive::RabsEngine(load_snapshot(resume));
    start = engine.state().packets_seen;
    if (start > trace.size()) throw std::runtime_error("snapshot is past the end of the trace");
  } else {
    engine = reactive::RabsEngine(cfg.setup.rabs, cfg.setup.spec, harness::model_seed(cfg.seed));
  }
  const std::size_t stop = at ? std::min(*at, trace.size()) : trace.size();
  if (stop < start) throw UsageError("--at lies before the snapshot position");
  std::vector<reactive::PacketOutcome> outcomes;
  outcomes.reserve(stop - start);
  for (std::size_t i = start; i < stop; ++i) outcomes.push_back(engine.process(trace[i]));

  write_text(cfg.out_dir / "events.tsv", event_log(outcomes, trace));
  save_snapshot(engine.state(), cfg.out_dir / "snapshot.json");
  std::cout << "processed packets " << start << ".." << stop << ", state digest " << state_digest(engine.state())
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"R-ABS / ABS anomaly detection experiments"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Base seed (overrides the config)");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--jobs", common.jobs, "Worker threads (default: available cores)");
    sub->add_option("--format", common.format, "csv or json (default: both)");
  };

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic trace from the config's phase script");
  add_common(synth_cmd);

  std::string trace_path;
  std::string spec_path;
  auto* feat_cmd = app.add_subcommand("featurize", "Dump one feature bitstring per packet");
  add_common(feat_cmd);
  feat_cmd->add_option("--trace", trace_path, "Trace file")->check(CLI::ExistingFile);
  feat_cmd->add_option("--spec", spec_path, "Feature spec file (default: built-in)")->check(CLI::ExistingFile);

  bool suite = false;
  auto* run_cmd = app.add_subcommand("run", "Run replicated experiments and write results");
  add_common(run_cmd);
  run_cmd->add_flag("--suite", suite, "Every attack profile under the four standard scripts");
  run_cmd->add_option("--trace", trace_path, "Run on an existing trace instead of a generated one")
      ->check(CLI::ExistingFile);

  std::optional<std::size_t> at;
  std::string resume;
  auto* snap_cmd = app.add_subcommand("snapshot", "Run R-ABS to a packet index and dump, or resume from a dump");
  add_common(snap_cmd);
  snap_cmd->add_option("--trace", trace_path, "Trace file (default: generated from the config)")
      ->check(CLI::ExistingFile);
  snap_cmd->add_option("--at", at, "Stop after this many packets and write the snapshot");
  snap_cmd->add_option("--resume", resume, "Snapshot file to continue from")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*synth_cmd) return cmd_synth(common);
    if (*feat_cmd) return cmd_featurize(common, trace_path, spec_path);
    if (*run_cmd) return cmd_run(common, suite, trace_path);
    if (*snap_cmd) return cmd_snapshot(common, trace_path, at, resume);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
