#include "rabs/config.hpp"

#include <functional>
#include <map>

#include "text_util.hpp"

namespace rabs {

namespace {

using Setter = std::function<void(std::string_view)>;

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

template <class T>
Setter integer(T& dst) {
  return [&dst](std::string_view v) {
    auto n = detail::parse_number<T>(v);
    if (!n) throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
    dst = *n;
  };
}

Setter real(double& dst) {
  return [&dst](std::string_view v) {
    auto d = detail::parse_double(v);
    if (!d) throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
    dst = *d;
  };
}

Setter boolean(bool& dst) {
  return [&dst](std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") {
      dst = true;
    } else if (v == "false" || v == "0" || v == "no") {
      dst = false;
    } else {
      throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
    }
  };
}

/// "a:0.5,b:0.5" into (key, weight) pairs.
std::vector<std::pair<std::string_view, double>> weighted_list(std::string_view v) {
  std::vector<std::pair<std::string_view, double>> out;
  for (auto item : detail::split(v, ',')) {
    item = detail::trim(item);
    const auto colon = item.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("expected name:weight, got '" + std::string(item) + "'");
    auto w = detail::parse_double(item.substr(colon + 1));
    if (!w) throw std::invalid_argument("bad weight in '" + std::string(item) + "'");
    out.emplace_back(detail::trim(item.substr(0, colon)), *w);
  }
  return out;
}

synth::Distribution<Transport> parse_transport_mix(std::string_view v) {
  synth::Distribution<Transport> out;
  for (auto [name, w] : weighted_list(v)) {
    if (name == "TCP") {
      out.emplace_back(Transport::Tcp, w);
    } else if (name == "UDP") {
      out.emplace_back(Transport::Udp, w);
    } else {
      throw std::invalid_argument("unknown transport " + std::string(name));
    }
  }
  return out;
}

synth::Distribution<std::uint16_t> parse_port_mix(std::string_view v) {
  synth::Distribution<std::uint16_t> out;
  for (auto [name, w] : weighted_list(v)) {
    auto port = detail::parse_number<std::uint16_t>(name);
    if (!port) throw std::invalid_argument("bad port " + std::string(name));
    out.emplace_back(*port, w);
  }
  return out;
}

/// Flags inside one entry are joined with '+', "-" is the empty set.
synth::Distribution<FlagSet> parse_flag_mix(std::string_view v) {
  synth::Distribution<FlagSet> out;
  for (auto [name, w] : weighted_list(v)) {
    std::string joined(name);
    for (auto& c : joined) {
      if (c == '+') c = ',';
    }
    out.emplace_back(FlagSet::parse(joined), w);
  }
  return out;
}

std::vector<std::string_view> words(std::string_view v) {
  std::vector<std::string_view> out;
  for (auto w : detail::split(v, ',')) {
    w = detail::trim(w);
    if (!w.empty()) out.push_back(w);
  }
  return out;
}

synth::PhaseScript parse_segments(std::string_view v) {
  synth::PhaseScript s;
  for (auto [name, count] : weighted_list(v)) {
    if (!(count >= 1.0) || count != static_cast<double>(static_cast<std::size_t>(count))) {
      throw std::invalid_argument("segment count must be a positive integer");
    }
    s.segments.push_back({std::string(name), static_cast<std::size_t>(count)});
  }
  return s;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.script = synth::standard_script(synth::ScriptKind::FourPhase, "dos-land-like");
  return c;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  auto& setup = cfg.setup;
  auto& r = setup.rabs;
  auto& e = setup.rabs.energy;
  auto& a = setup.abs;

  std::string script = "four-phase";
  std::string attack = "dos-land-like";
  std::size_t normal_length = synth::kDefaultNormalPhase;
  std::size_t attack_length = 0;
  std::optional<synth::PhaseScript> segments;
  std::optional<std::filesystem::path> spec_path;
  std::map<std::string, synth::TrafficProfile, std::less<>> profiles;
  std::optional<int> version;

  const std::map<std::string, std::map<std::string, Setter>, std::less<>> base_sections = {
      {"experiment",
       {{"models",
         [&](std::string_view v) {
           cfg.models.clear();
           for (auto w : words(v)) cfg.models.push_back(harness::parse_model(w));
           if (cfg.models.empty()) throw std::invalid_argument("models list is empty");
         }},
        {"script", [&](std::string_view v) { script = std::string(v); }},
        {"attack", [&](std::string_view v) { attack = std::string(v); }},
        {"normal_length", integer(normal_length)},
        {"attack_length", integer(attack_length)},
        {"segments", [&](std::string_view v) { segments = parse_segments(v); }},
        {"replicates", integer(cfg.replicates)},
        {"seed", integer(cfg.seed)},
        {"feature_spec", [&](std::string_view v) { spec_path = base_dir / std::filesystem::path(std::string(v)); }},
        {"out", [&](std::string_view v) { cfg.out_dir = base_dir / std::filesystem::path(std::string(v)); }}}},
      {"energy",
       {{"initial", real(e.initial)},
        {"max", real(e.max)},
        {"gain", real(e.gain)},
        {"break_even", real(e.break_even)},
        {"fit_threshold", real(e.fit_threshold)},
        {"mature_threshold", real(e.mature_threshold)}}},
      {"rabs",
       {{"n_size", integer(r.n_size)},
        {"r_size", integer(r.r_size)},
        {"memory_size", integer(r.memory_size)},
        {"ds_threshold", integer(r.ds_threshold)},
        {"as_count_threshold", integer(r.as_count_threshold)},
        {"as_energy_threshold", real(r.as_energy_threshold)},
        {"insa_threshold", real(r.insa_threshold)},
        {"recognition_threshold", real(r.recognition_threshold)},
        {"consolidate_after", integer(r.consolidate_after)},
        {"signature_size", integer(r.signature_size)},
        {"seed_window", integer(r.seed_window)},
        {"reproduction_rate", real(r.reproduction_rate)},
        {"offspring_mutation", real(r.offspring_mutation)},
        {"spawn_mutation", real(r.spawn_mutation)},
        {"refill_mutation", real(r.refill_mutation)},
        {"init_density", real(r.init_density)},
        {"stale_after", integer(r.stale_after)},
        {"expose_when_inhibited", boolean(r.expose_when_inhibited)}}},
      {"abs",
       {{"phi", real(a.phi)},
        {"epsilon", real(a.epsilon)},
        {"reproduction_energy", real(a.reproduction_energy)},
        {"population_size", integer(a.population_size)},
        {"particle_capacity", integer(a.particle_capacity)},
        {"window", integer(a.window)},
        {"k", real(a.k)},
        {"delta_floor", real(a.delta_floor)},
        {"burn_in", real(setup.abs_burn_in)}}},
  };

  std::string section;
  synth::TrafficProfile* profile = nullptr;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      profile = nullptr;
      if (section.starts_with("profile.")) {
        const auto name = section.substr(8);
        if (name.empty()) fail(line_no, "profile section needs a name");
        if (profiles.contains(name)) fail(line_no, "duplicate profile " + name);
        auto& p = profiles[name];
        p.name = name;
        p.label = name == "normal" ? Label::normal() : Label::attack_named(name);
        profile = &p;
      } else if (!base_sections.contains(section)) {
        fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const auto key = std::string(detail::trim(line.substr(0, eq)));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto qualified = section + "." + key;
    if (seen.contains(qualified)) fail(line_no, "duplicate key " + key);
    seen[qualified] = line_no;

    try {
      if (section.empty()) {
        if (key != "version") fail(line_no, "unknown key " + key + " outside any section");
        auto v = detail::parse_number<int>(value);
        if (!v) fail(line_no, "version must be an integer");
        if (*v != 1) fail(line_no, "unsupported config version " + std::to_string(*v));
        version = *v;
      } else if (profile != nullptr) {
        if (key == "transport") {
          profile->transport_mix = parse_transport_mix(value);
        } else if (key == "ports") {
          profile->port_mix = parse_port_mix(value);
        } else if (key == "flags") {
          profile->flag_mix = parse_flag_mix(value);
        } else if (key == "label") {
          profile->label = Label::parse(value);
        } else {
          fail(line_no, "unknown key " + key + " in [" + section + "]");
        }
      } else {
        const auto& keys = base_sections.find(section)->second;
        const auto it = keys.find(key);
        if (it == keys.end()) fail(line_no, "unknown key " + key + " in [" + section + "]");
        it->second(value);
      }
    } catch (const std::invalid_argument& ex) {
      fail(line_no, key + ": " + ex.what());
    }
  }
  if (!version) throw ConfigError("config: missing 'version = 1'");

  try {
    for (auto& [name, p] : profiles) {
      p.validate();
      setup.profiles[name] = p;
    }
    if (spec_path) {
      if (!std::filesystem::exists(*spec_path)) throw ConfigError("config: feature spec " + spec_path->string() + " not found");
      setup.spec = load_feature_spec(*spec_path);
      cfg.feature_spec_path = spec_path;
    }
    setup.abs_energy = e;
    setup.validate();
    if (segments) {
      cfg.script = *segments;
      cfg.script_name = "custom";
    } else {
      cfg.script = synth::standard_script(synth::parse_script_kind(script), attack, normal_length, attack_length);
      cfg.script_name = script;
    }
    cfg.script.validate(setup.profiles);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  if (cfg.replicates == 0) throw ConfigError("config: replicates must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const std::runtime_error& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  return parse_config(text, path.parent_path());
}

}  // namespace rabs
