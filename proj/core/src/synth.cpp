#include "rabs/synth.hpp"

#include <cmath>
#include <stdexcept>

namespace rabs::synth {

namespace {

template <class T>
void check_distribution(const Distribution<T>& d, const std::string& what, const std::string& profile) {
  if (d.empty()) throw std::invalid_argument("profile " + profile + ": empty " + what);
  double sum = 0.0;
  for (const auto& [value, p] : d) {
    if (!(p >= 0.0)) throw std::invalid_argument("profile " + profile + ": negative weight in " + what);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("profile " + profile + ": " + what + " sums to " + std::to_string(sum));
  }
}

template <class T>
const T& draw(const Distribution<T>& d, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [value, p] : d) {
    acc += p;
    if (u < acc) return value;
  }
  return d.back().first;
}

ProfileSet build_defaults() {
  using F = Flag;
  ProfileSet set;
  auto add = [&](TrafficProfile p) {
    p.validate();
    auto name = p.name;
    set.emplace(std::move(name), std::move(p));
  };

  add({"normal",
       {{Transport::Tcp, 0.85}, {Transport::Udp, 0.15}},
       {{80, 0.40}, {443, 0.15}, {53, 0.12}, {25, 0.08}, {22, 0.07}, {110, 0.03}, {143, 0.03}, {123, 0.02},
        {50000, 0.10}},
       {{{F::DF, F::ACK}, 0.50},
        {{F::DF, F::ACK, F::PSH}, 0.35},
        {{F::DF, F::SYN}, 0.05},
        {{F::DF, F::ACK, F::FIN}, 0.05},
        {{F::ACK}, 0.05}},
       Label::normal()});

  // Malformed SYNs with reserved bits and urgent pointer against Telnet.
  add({"dos-land-like",
       {{Transport::Tcp, 1.0}},
       {{23, 1.0}},
       {{{F::RB, F::MF, F::URG, F::SYN, F::F1}, 0.7}, {{F::RB, F::URG, F::SYN, F::F1}, 0.3}},
       Label::attack_named("dos-land-like")});

  // Fragmented datagrams against echo and time services.
  add({"dos-storm-like",
       {{Transport::Udp, 1.0}},
       {{7, 0.5}, {37, 0.5}},
       {{{F::RB, F::MF}, 1.0}},
       Label::attack_named("dos-storm-like")});

  add({"r2l-tunnel-like",
       {{Transport::Tcp, 1.0}},
       {{80, 0.8}, {8000, 0.2}},
       {{{F::MF, F::F2, F::URG, F::PSH, F::FIN}, 0.5}, {{F::RB, F::MF, F::F2, F::URG, F::PSH, F::FIN}, 0.5}},
       Label::attack_named("r2l-tunnel-like")});

  // Close to normal on purpose: ordinary service ports, ACK set, only RST+FIN+F1 stand out.
  add({"u2r-quiet-like",
       {{Transport::Tcp, 1.0}},
       {{22, 0.4}, {80, 0.3}, {25, 0.3}},
       {{{F::ACK, F::RST, F::FIN, F::F1}, 0.5}, {{F::DF, F::ACK, F::RST, F::FIN, F::F1}, 0.5}},
       Label::attack_named("u2r-quiet-like")});
  return set;
}

}  // namespace

void TrafficProfile::validate() const {
  check_distribution(transport_mix, "transport_mix", name);
  check_distribution(port_mix, "port_mix", name);
  check_distribution(flag_mix, "flag_mix", name);
}

std::size_t PhaseScript::total() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.count;
  return n;
}

void PhaseScript::validate(const ProfileSet& profiles) const {
  if (segments.empty()) throw std::invalid_argument("phase script has no segments");
  for (const auto& s : segments) {
    if (s.count == 0) throw std::invalid_argument("segment " + s.profile + " has zero packets");
    if (!profiles.contains(s.profile)) throw std::invalid_argument("unknown profile " + s.profile);
  }
}

std::vector<PacketRecord> gen_segment(const TrafficProfile& profile, std::size_t n, Rng& rng) {
  std::vector<PacketRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PacketRecord r;
    r.seq_no = i;
    r.transport = draw(profile.transport_mix, rng);
    r.src_port = static_cast<std::uint16_t>(1024 + rng.below(65536 - 1024));
    r.dst_port = draw(profile.port_mix, rng);
    r.flags = draw(profile.flag_mix, rng);
    if (r.transport == Transport::Udp) r.flags = r.flags.ip_only();
    r.label = profile.label;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PacketRecord> assemble(const PhaseScript& script, const ProfileSet& profiles, Rng& rng) {
  script.validate(profiles);
  std::vector<PacketRecord> out;
  out.reserve(script.total());
  for (const auto& s : script.segments) {
    auto seg = gen_segment(profiles.find(s.profile)->second, s.count, rng);
    for (auto& r : seg) {
      r.seq_no = out.size();
      out.push_back(std::move(r));
    }
  }
  return out;
}

const ProfileSet& default_profiles() {
  static const ProfileSet set = build_defaults();
  return set;
}

std::size_t default_attack_length(std::string_view attack) {
  if (attack == "dos-land-like") return 1100;
  if (attack == "dos-storm-like") return 1667;
  if (attack == "r2l-tunnel-like") return 1196;
  if (attack == "u2r-quiet-like") return 1533;
  return 1000;
}

std::string_view script_kind_name(ScriptKind k) {
  switch (k) {
    case ScriptKind::Baseline: return "baseline";
    case ScriptKind::TwoPhase: return "two-phase";
    case ScriptKind::ThreePhase: return "three-phase";
    case ScriptKind::FourPhase: return "four-phase";
    case ScriptKind::NormalOnly: return "normal-only";
  }
  return "?";
}

ScriptKind parse_script_kind(std::string_view name) {
  for (auto k : {ScriptKind::Baseline, ScriptKind::TwoPhase, ScriptKind::ThreePhase, ScriptKind::FourPhase,
                 ScriptKind::NormalOnly}) {
    if (script_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown script kind " + std::string(name));
}

PhaseScript standard_script(ScriptKind kind, const std::string& attack, std::size_t normal_len,
                            std::size_t attack_len) {
  if (attack_len == 0) attack_len = default_attack_length(attack);
  PhaseScript s;
  switch (kind) {
    case ScriptKind::Baseline:
      s.segments = {{"normal", normal_len}, {attack, kDefaultBoundedAttack}};
      break;
    case ScriptKind::TwoPhase:
      s.segments = {{"normal", normal_len}, {attack, attack_len}};
      break;
    case ScriptKind::ThreePhase:
      s.segments = {{"normal", normal_len}, {attack, attack_len}, {"normal", normal_len}};
      break;
    case ScriptKind::FourPhase:
      s.segments = {{"normal", normal_len}, {attack, attack_len}, {"normal", normal_len}, {attack, attack_len}};
      break;
    case ScriptKind::NormalOnly:
      s.segments = {{"normal", normal_len}, {"normal", 5000}};
      break;
  }
  return s;
}

}  // namespace rabs::synth
