#include "rabs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace rabs::harness {

namespace {

/// Sum in sorted order so the result does not depend on input order.
double ordered_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double ordered_mean(std::vector<double> v) {
  const auto n = static_cast<double>(v.size());
  return ordered_sum(std::move(v)) / n;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<Exposure> exposures_of(std::span<const PacketRecord> trace) {
  std::vector<Exposure> out;
  std::map<std::string, std::size_t> seen;
  for (const auto& run : label_runs(trace)) {
    if (!run.label.attack) continue;
    out.push_back({run.label.name, ++seen[run.label.name], run.start, run.length, std::nullopt});
  }
  return out;
}

void fill_reactions(std::vector<Exposure>& exposures, const std::vector<Prediction>& predicted, std::size_t first) {
  for (auto& e : exposures) {
    for (std::size_t i = std::max(e.start, first); i < e.start + e.length; ++i) {
      if (predicted[i] == Prediction::Attack) {
        e.reaction_time = i - e.start + 1;
        break;
      }
    }
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view model_name(Model m) { return m == Model::Abs ? "abs" : "rabs"; }

Model parse_model(std::string_view name) {
  if (name == "abs" || name == "ABS") return Model::Abs;
  if (name == "rabs" || name == "RABS" || name == "r-abs") return Model::Rabs;
  throw std::invalid_argument("unknown model " + std::string(name));
}

void ConfusionMatrix::record(bool actual_attack, Prediction predicted) {
  const bool alarm = predicted == Prediction::Attack;
  if (actual_attack) {
    (alarm ? tp : fn) += 1.0;
  } else {
    (alarm ? fp : tn) += 1.0;
  }
}

double sensitivity(const ConfusionMatrix& m) {
  if (!(m.tp + m.fn > 0.0)) throw std::domain_error("sensitivity undefined: TP+FN is zero");
  return m.tp / (m.tp + m.fn);
}

double specificity(const ConfusionMatrix& m) {
  if (!(m.tn + m.fp > 0.0)) throw std::domain_error("specificity undefined: TN+FP is zero");
  return m.tn / (m.tn + m.fp);
}

SensSpec sens_spec(const ConfusionMatrix& m) { return {sensitivity(m), specificity(m)}; }

void ExperimentSetup::validate() const {
  rabs.validate();
  abs_energy.validate();
  abs.validate(abs_energy);
  if (!(abs_burn_in >= 0.0 && abs_burn_in < 1.0)) throw std::invalid_argument("abs_burn_in must be in [0,1)");
  for (const auto& [name, p] : profiles) p.validate();
}

std::vector<Span> label_runs(std::span<const PacketRecord> trace) {
  std::vector<Span> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (out.empty() || !(out.back().label == trace[i].label)) {
      out.push_back({trace[i].label, i, 0});
    }
    ++out.back().length;
  }
  return out;
}

std::uint64_t trace_seed(std::uint64_t seed) { return derive_seed(seed, 0); }
std::uint64_t model_seed(std::uint64_t seed) { return derive_seed(seed, 1); }

std::vector<PacketRecord> make_trace(const synth::PhaseScript& script, const synth::ProfileSet& profiles,
                                     std::uint64_t seed) {
  Rng rng(trace_seed(seed));
  return synth::assemble(script, profiles, rng);
}

RunResult run_trace(Model model, std::span<const PacketRecord> trace, std::size_t calibration,
                    const ExperimentSetup& setup, std::uint64_t seed) {
  setup.validate();
  RunResult res;
  res.model = model;
  res.seed = seed;
  res.exposures = exposures_of(trace);
  std::vector<Prediction> predicted(trace.size(), Prediction::Normal);
  std::size_t first = 0;

  if (model == Model::Abs) {
    calibration = std::min(calibration, trace.size());
    const auto skip = static_cast<std::size_t>(setup.abs_burn_in * static_cast<double>(calibration));
    if (calibration - skip < setup.abs.window) {
      throw std::invalid_argument("abs: calibration phase of " + std::to_string(calibration) +
                                  " packets leaves fewer calibration means than the observer window");
    }
    abs::AbsDetector det(setup.spec.lv(), setup.abs, setup.abs_energy, model_seed(seed));
    std::vector<double> means;
    means.reserve(calibration - skip);
    for (std::size_t i = 0; i < calibration; ++i) {
      const auto st = det.step(featurize(trace[i], setup.spec));
      if (i >= skip) means.push_back(st.mean_energy);
    }
    det.calibrate(means);
    for (std::size_t i = calibration; i < trace.size(); ++i) {
      const auto st = det.step(featurize(trace[i], setup.spec));
      predicted[i] = det.classify(st.mean_energy);
    }
    first = calibration;
  } else {
    reactive::RabsEngine engine(setup.rabs, setup.spec, model_seed(seed));
    for (std::size_t i = 0; i < trace.size(); ++i) predicted[i] = engine.process(trace[i]).verdict.prediction;
    res.counters = engine.state().counters;
  }

  res.excluded = first;
  res.verdict_log.reserve(trace.size() - first);
  for (std::size_t i = first; i < trace.size(); ++i) {
    res.matrix.record(trace[i].label.attack, predicted[i]);
    res.verdict_log.push_back({trace[i].seq_no, trace[i].label.attack, predicted[i]});
  }
  fill_reactions(res.exposures, predicted, first);
  return res;
}

RunResult run_experiment(Model model, const synth::PhaseScript& script, const ExperimentSetup& setup,
                         std::uint64_t seed, std::string script_name) {
  setup.validate();
  script.validate(setup.profiles);
  const auto trace = make_trace(script, setup.profiles, seed);
  auto res = run_trace(model, trace, script.segments.front().count, setup, seed);
  res.script = std::move(script_name);
  res.phases = script.segments.size();
  return res;
}

std::vector<RunResult> run_replicas(Model model, const synth::PhaseScript& script, const ExperimentSetup& setup,
                                    std::uint64_t base_seed, std::size_t replicates, std::size_t jobs,
                                    std::string script_name) {
  setup.validate();
  script.validate(setup.profiles);
  std::vector<RunResult> out(replicates);
  if (replicates == 0) return out;
  jobs = std::clamp<std::size_t>(jobs, 1, replicates);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < replicates; i = next++) {
      try {
        out[i] = run_experiment(model, script, setup, base_seed + i, script_name);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

Summary aggregate(std::span<const RunResult> results) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  Summary s;
  s.runs = results.size();
  std::vector<double> tp, fn, tn, fp;
  std::map<std::pair<std::string, std::size_t>, std::vector<std::optional<std::size_t>>> times;
  for (const auto& r : results) {
    tp.push_back(r.matrix.tp);
    fn.push_back(r.matrix.fn);
    tn.push_back(r.matrix.tn);
    fp.push_back(r.matrix.fp);
    for (const auto& e : r.exposures) times[{e.attack, e.occurrence}].push_back(e.reaction_time);
  }
  s.mean_matrix = {ordered_mean(tp), ordered_mean(fn), ordered_mean(tn), ordered_mean(fp)};
  if (s.mean_matrix.attacks() > 0.0) s.sens = sensitivity(s.mean_matrix);
  if (s.mean_matrix.normals() > 0.0) s.spec = specificity(s.mean_matrix);

  for (const auto& [key, list] : times) {
    ReactionSummary rs;
    rs.attack = key.first;
    rs.occurrence = key.second;
    rs.runs = list.size();
    std::vector<double> hits;
    for (const auto& t : list) {
      if (t) hits.push_back(static_cast<double>(*t));
    }
    rs.detected = hits.size();
    if (!hits.empty()) {
      rs.median = median_of(hits);
      rs.mean = ordered_mean(std::move(hits));
    }
    s.reactions.push_back(std::move(rs));
  }
  return s;
}

std::string format_reaction(const std::optional<double>& t) { return t ? fixed(*t, 1) : "no"; }

std::string format_table(const Summary& s, std::string_view title) {
  const auto& m = s.mean_matrix;
  auto cell = [](double v) {
    auto t = fixed(v, 1);
    return std::string(t.size() < 10 ? 10 - t.size() : 0, ' ') + t;
  };
  std::ostringstream os;
  os << title << " (" << s.runs << " runs)\n";
  os << "                    Predicted\n";
  os << "                    Attack    Normal\n";
  os << "  Actual Attack " << cell(m.tp) << cell(m.fn) << "\n";
  os << "         Normal " << cell(m.fp) << cell(m.tn) << "\n";
  os << "  Sens: " << (s.sens ? fixed(*s.sens, 2) : "n/a") << "   Spec: " << (s.spec ? fixed(*s.spec, 2) : "n/a")
     << "\n";
  for (const auto& r : s.reactions) {
    os << "  reaction " << r.attack << " #" << r.occurrence << ": " << format_reaction(r.mean) << " ("
       << r.detected << "/" << r.runs << " detected)\n";
  }
  return os.str();
}

namespace {

nlohmann::json matrix_json(const ConfusionMatrix& m) {
  return {{"tp", m.tp}, {"fn", m.fn}, {"tn", m.tn}, {"fp", m.fp}};
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> maybe(double (*f)(const ConfusionMatrix&), const ConfusionMatrix& m) {
  try {
    return f(m);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

}  // namespace

std::string results_json(std::span<const ResultSet> sets) {
  using nlohmann::json;
  json root{{"format", "rabs-results"}, {"version", 1}, {"abs_calibration_excluded", true}};
  json arr = json::array();
  for (const auto& set : sets) {
    json runs = json::array();
    for (const auto& r : set.runs) {
      json ex = json::array();
      for (const auto& e : r.exposures) {
        ex.push_back({{"attack", e.attack},
                      {"occurrence", e.occurrence},
                      {"start", e.start},
                      {"length", e.length},
                      {"reaction_time", e.reaction_time ? json(*e.reaction_time) : json()}});
      }
      json run{{"model", model_name(r.model)},
               {"script", r.script},
               {"phases", r.phases},
               {"seed", r.seed},
               {"excluded", r.excluded},
               {"matrix", matrix_json(r.matrix)},
               {"sens", optional_json(maybe(sensitivity, r.matrix))},
               {"spec", optional_json(maybe(specificity, r.matrix))},
               {"exposures", std::move(ex)}};
      if (r.counters) {
        const auto& c = *r.counters;
        run["counters"] = {{"spawned", c.spawned},
                           {"consolidated", c.consolidated},
                           {"collected", c.collected},
                           {"purges", c.purges},
                           {"catastrophic_purges", c.catastrophic_purges},
                           {"starvations", c.starvations},
                           {"regrown", c.regrown},
                           {"culled", c.culled}};
      }
      runs.push_back(std::move(run));
    }
    json reactions = json::array();
    for (const auto& rs : set.summary.reactions) {
      reactions.push_back({{"attack", rs.attack},
                           {"occurrence", rs.occurrence},
                           {"runs", rs.runs},
                           {"detected", rs.detected},
                           {"detection_rate", rs.detection_rate()},
                           {"mean", optional_json(rs.mean)},
                           {"median", optional_json(rs.median)},
                           {"display", format_reaction(rs.mean)}});
    }
    const auto& front = set.runs.empty() ? RunResult{} : set.runs.front();
    arr.push_back({{"model", model_name(front.model)},
                   {"script", front.script},
                   {"phases", front.phases},
                   {"runs", std::move(runs)},
                   {"aggregate",
                    {{"runs", set.summary.runs},
                     {"matrix", matrix_json(set.summary.mean_matrix)},
                     {"sens", optional_json(set.summary.sens)},
                     {"spec", optional_json(set.summary.spec)},
                     {"reactions", std::move(reactions)}}}});
  }
  root["experiments"] = std::move(arr);
  return root.dump(2) + "\n";
}

std::string results_csv(std::span<const ResultSet> sets) {
  std::ostringstream os;
  os << "model,phases,seed,sens,spec,attack,reaction_time\n";
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v, 6) : std::string(); };
  for (const auto& set : sets) {
    for (const auto& r : set.runs) {
      const auto sens = opt(maybe(sensitivity, r.matrix));
      const auto spec = opt(maybe(specificity, r.matrix));
      const auto prefix = std::string(model_name(r.model)) + "," + std::to_string(r.phases) + "," +
                          std::to_string(r.seed) + "," + sens + "," + spec + ",";
      if (r.exposures.empty()) {
        os << prefix << ",\n";
        continue;
      }
      for (const auto& e : r.exposures) {
        os << prefix << e.attack << "#" << e.occurrence << ","
           << (e.reaction_time ? std::to_string(*e.reaction_time) : std::string("no")) << "\n";
      }
    }
  }
  return os.str();
}

}  // namespace rabs::harness
