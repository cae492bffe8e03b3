#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rabs/features.hpp"
#include "rabs/random.hpp"

namespace rabs::synth {

template <class T>
using Distribution = std::vector<std::pair<T, double>>;

struct TrafficProfile {
  std::string name;
  Distribution<Transport> transport_mix;
  Distribution<std::uint16_t> port_mix;
  /// TCP control bits are stripped from draws that land on UDP.
  Distribution<FlagSet> flag_mix;
  Label label;

  /// Throws std::invalid_argument if a distribution is empty, negative or does not sum to 1.
  void validate() const;
};

using ProfileSet = std::map<std::string, TrafficProfile, std::less<>>;

struct Segment {
  std::string profile;
  std::size_t count = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct PhaseScript {
  std::vector<Segment> segments;

  std::size_t total() const;
  void validate(const ProfileSet& profiles) const;
  friend bool operator==(const PhaseScript&, const PhaseScript&) = default;
};

std::vector<PacketRecord> gen_segment(const TrafficProfile& profile, std::size_t n, Rng& rng);

/// Concatenates the segments in order, renumbering seq_no from 0.
std::vector<PacketRecord> assemble(const PhaseScript& script, const ProfileSet& profiles, Rng& rng);

/// normal, dos-land-like, dos-storm-like, r2l-tunnel-like, u2r-quiet-like.
const ProfileSet& default_profiles();

inline constexpr std::size_t kDefaultNormalPhase = 2000;
inline constexpr std::size_t kDefaultBoundedAttack = 200;

/// Packet count each shipped attack profile uses for a full (unbounded) attack phase.
std::size_t default_attack_length(std::string_view attack);

enum class ScriptKind : std::uint8_t { Baseline, TwoPhase, ThreePhase, FourPhase, NormalOnly };

std::string_view script_kind_name(ScriptKind k);
ScriptKind parse_script_kind(std::string_view name);

/// Standard experiment layout: normal, attack, normal, same attack (truncated per kind).
/// Baseline bounds the attack phase to kDefaultBoundedAttack packets.
PhaseScript standard_script(ScriptKind kind, const std::string& attack, std::size_t normal_len = kDefaultNormalPhase,
                            std::size_t attack_len = 0);

}  // namespace rabs::synth
