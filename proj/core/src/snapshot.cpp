#include "rabs/snapshot.hpp"

#include <cstdio>

#include "json.hpp"
#include "text_util.hpp"

namespace rabs {

using nlohmann::json;
using reactive::EngineState;
using reactive::RabsConfig;
using reactive::RPopulation;

namespace {

json agent_json(const Agent& a) {
  return json{{"id", a.id}, {"energy", a.energy}, {"age", a.age}, {"genome", a.genome.to_string()}};
}

Agent agent_from(const json& j) {
  Agent a;
  a.id = j.at("id").get<std::uint64_t>();
  a.energy = j.at("energy").get<double>();
  a.age = j.at("age").get<std::uint64_t>();
  a.genome = BitVector::from_string(j.at("genome").get<std::string>());
  return a;
}

json agents_json(const std::vector<Agent>& v) {
  json arr = json::array();
  for (const auto& a : v) arr.push_back(agent_json(a));
  return arr;
}

std::vector<Agent> agents_from(const json& j) {
  std::vector<Agent> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(agent_from(e));
  return out;
}

json config_json(const RabsConfig& c) {
  const auto& e = c.energy;
  return json{{"n_size", c.n_size},
              {"r_size", c.r_size},
              {"memory_size", c.memory_size},
              {"ds_threshold", c.ds_threshold},
              {"as_count_threshold", c.as_count_threshold},
              {"as_energy_threshold", c.as_energy_threshold},
              {"insa_threshold", c.insa_threshold},
              {"recognition_threshold", c.recognition_threshold},
              {"consolidate_after", c.consolidate_after},
              {"signature_size", c.signature_size},
              {"seed_window", c.seed_window},
              {"reproduction_rate", c.reproduction_rate},
              {"offspring_mutation", c.offspring_mutation},
              {"spawn_mutation", c.spawn_mutation},
              {"refill_mutation", c.refill_mutation},
              {"init_density", c.init_density},
              {"stale_after", c.stale_after},
              {"expose_when_inhibited", c.expose_when_inhibited},
              {"energy",
               {{"initial", e.initial},
                {"max", e.max},
                {"gain", e.gain},
                {"break_even", e.break_even},
                {"fit_threshold", e.fit_threshold},
                {"mature_threshold", e.mature_threshold}}}};
}

RabsConfig config_from(const json& j) {
  RabsConfig c;
  j.at("n_size").get_to(c.n_size);
  j.at("r_size").get_to(c.r_size);
  j.at("memory_size").get_to(c.memory_size);
  j.at("ds_threshold").get_to(c.ds_threshold);
  j.at("as_count_threshold").get_to(c.as_count_threshold);
  j.at("as_energy_threshold").get_to(c.as_energy_threshold);
  j.at("insa_threshold").get_to(c.insa_threshold);
  j.at("recognition_threshold").get_to(c.recognition_threshold);
  j.at("consolidate_after").get_to(c.consolidate_after);
  j.at("signature_size").get_to(c.signature_size);
  j.at("seed_window").get_to(c.seed_window);
  j.at("reproduction_rate").get_to(c.reproduction_rate);
  j.at("offspring_mutation").get_to(c.offspring_mutation);
  j.at("spawn_mutation").get_to(c.spawn_mutation);
  j.at("refill_mutation").get_to(c.refill_mutation);
  j.at("init_density").get_to(c.init_density);
  j.at("stale_after").get_to(c.stale_after);
  j.at("expose_when_inhibited").get_to(c.expose_when_inhibited);
  const auto& e = j.at("energy");
  e.at("initial").get_to(c.energy.initial);
  e.at("max").get_to(c.energy.max);
  e.at("gain").get_to(c.energy.gain);
  e.at("break_even").get_to(c.energy.break_even);
  e.at("fit_threshold").get_to(c.energy.fit_threshold);
  e.at("mature_threshold").get_to(c.energy.mature_threshold);
  return c;
}

json rpop_json(const RPopulation& p) {
  json sig = json::array();
  for (const auto& g : p.signature) sig.push_back(g.to_string());
  return json{{"id", p.id},
              {"state", p.state == reactive::PopulationState::Training ? "training" : "consolidated"},
              {"created_at", p.created_at},
              {"last_danger", p.last_danger},
              {"streak", p.streak},
              {"next_id", p.next_id},
              {"agents", agents_json(p.agents)},
              {"mature", agents_json(p.mature)},
              {"signature", std::move(sig)}};
}

RPopulation rpop_from(const json& j) {
  RPopulation p;
  j.at("id").get_to(p.id);
  const auto state = j.at("state").get<std::string>();
  if (state == "training") {
    p.state = reactive::PopulationState::Training;
  } else if (state == "consolidated") {
    p.state = reactive::PopulationState::Consolidated;
  } else {
    throw SnapshotError("snapshot: unknown population state " + state);
  }
  j.at("created_at").get_to(p.created_at);
  j.at("last_danger").get_to(p.last_danger);
  j.at("streak").get_to(p.streak);
  j.at("next_id").get_to(p.next_id);
  p.agents = agents_from(j.at("agents"));
  p.mature = agents_from(j.at("mature"));
  for (const auto& g : j.at("signature")) p.signature.push_back(BitVector::from_string(g.get<std::string>()));
  return p;
}

json to_json(const EngineState& s) {
  json recent = json::array();
  for (const auto& v : s.recent) recent.push_back(v.to_string());
  json rpops = json::array();
  for (const auto& p : s.rpops) rpops.push_back(rpop_json(p));
  json signals{{"ds", s.last_signals.ds}, {"as", s.last_signals.as}, {"as_source", nullptr}};
  if (s.last_signals.as_source) signals["as_source"] = *s.last_signals.as_source;
  const auto& c = s.counters;
  return json{{"format", kSnapshotFormat},
              {"version", kSnapshotVersion},
              {"config", config_json(s.config)},
              {"feature_spec", format_feature_spec(s.spec)},
              {"rng", s.rng.state()},
              {"packets_seen", s.packets_seen},
              {"next_population_id", s.next_population_id},
              {"last_signals", std::move(signals)},
              {"counters",
               {{"spawned", c.spawned},
                {"consolidated", c.consolidated},
                {"collected", c.collected},
                {"purges", c.purges},
                {"catastrophic_purges", c.catastrophic_purges},
                {"starvations", c.starvations},
                {"regrown", c.regrown},
                {"culled", c.culled}}},
              {"npop",
               {{"next_id", s.npop.next_id},
                {"agents", agents_json(s.npop.agents)},
                {"memory", agents_json(s.npop.memory)}}},
              {"rpops", std::move(rpops)},
              {"recent", std::move(recent)}};
}

EngineState from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kSnapshotFormat) {
    throw SnapshotError("snapshot: missing or wrong format tag");
  }
  const int version = j.at("version").get<int>();
  if (version != kSnapshotVersion) {
    throw SnapshotError("snapshot: unsupported version " + std::to_string(version));
  }
  EngineState s{config_from(j.at("config")), parse_feature_spec(j.at("feature_spec").get<std::string>()),
                Rng{}, {}, {}, {}, 0, 0, {}, {}};
  s.rng.set_state(j.at("rng").get<std::string>());
  j.at("packets_seen").get_to(s.packets_seen);
  j.at("next_population_id").get_to(s.next_population_id);
  const auto& sig = j.at("last_signals");
  sig.at("ds").get_to(s.last_signals.ds);
  sig.at("as").get_to(s.last_signals.as);
  if (!sig.at("as_source").is_null()) s.last_signals.as_source = sig.at("as_source").get<std::uint64_t>();
  const auto& c = j.at("counters");
  c.at("spawned").get_to(s.counters.spawned);
  c.at("consolidated").get_to(s.counters.consolidated);
  c.at("collected").get_to(s.counters.collected);
  c.at("purges").get_to(s.counters.purges);
  c.at("catastrophic_purges").get_to(s.counters.catastrophic_purges);
  c.at("starvations").get_to(s.counters.starvations);
  c.at("regrown").get_to(s.counters.regrown);
  c.at("culled").get_to(s.counters.culled);
  const auto& n = j.at("npop");
  n.at("next_id").get_to(s.npop.next_id);
  s.npop.agents = agents_from(n.at("agents"));
  s.npop.memory = agents_from(n.at("memory"));
  for (const auto& p : j.at("rpops")) s.rpops.push_back(rpop_from(p));
  for (const auto& v : j.at("recent")) s.recent.push_back(BitVector::from_string(v.get<std::string>()));

  const auto lv = s.spec.lv();
  auto check = [&](const BitVector& g) {
    if (g.size() != lv) throw SnapshotError("snapshot: genome length does not match feature spec");
  };
  for (const auto& a : s.npop.agents) check(a.genome);
  for (const auto& a : s.npop.memory) check(a.genome);
  for (const auto& p : s.rpops) {
    for (const auto& a : p.agents) check(a.genome);
    for (const auto& a : p.mature) check(a.genome);
    for (const auto& g : p.signature) check(g);
  }
  for (const auto& v : s.recent) check(v);
  return s;
}

}  // namespace

std::string snapshot_to_string(const EngineState& state) { return to_json(state).dump(1) + "\n"; }

EngineState snapshot_from_string(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  } catch (const ParseError& e) {
    throw SnapshotError(std::string("snapshot: feature spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
}

void save_snapshot(const EngineState& state, const std::filesystem::path& path) {
  detail::write_file(path, snapshot_to_string(state));
}

EngineState load_snapshot(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const std::runtime_error& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
  return snapshot_from_string(text);
}

std::string state_digest(const EngineState& state) {
  const auto text = to_json(state).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rabs
