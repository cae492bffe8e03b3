#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rabs/bit_vector.hpp"

namespace rabs {

using FeatureVector = BitVector;

enum class Transport : std::uint8_t { Tcp, Udp };

/// Header flags. RB/MF/DF live in the IP header; the rest are TCP control
/// bits, where F1 and F2 are the two reserved bits preceding URG.
enum class Flag : std::uint8_t { RB, MF, DF, F1, F2, URG, ACK, PSH, RST, SYN, FIN };
inline constexpr std::size_t kFlagCount = 11;

std::string_view flag_name(Flag f);
std::optional<Flag> parse_flag(std::string_view name);
constexpr bool is_ip_flag(Flag f) { return f == Flag::RB || f == Flag::MF || f == Flag::DF; }

/// Bit set over Flag values.
class FlagSet {
 public:
  constexpr FlagSet() = default;
  constexpr FlagSet(std::initializer_list<Flag> flags) {
    for (auto f : flags) insert(f);
  }

  constexpr bool contains(Flag f) const { return (bits_ >> static_cast<unsigned>(f)) & 1U; }
  constexpr void insert(Flag f) { bits_ |= static_cast<std::uint16_t>(1U << static_cast<unsigned>(f)); }
  constexpr void erase(Flag f) { bits_ &= static_cast<std::uint16_t>(~(1U << static_cast<unsigned>(f))); }
  constexpr bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  bool has_tcp_flags() const;
  FlagSet ip_only() const;
  std::uint16_t bits() const { return bits_; }

  /// Comma-separated names in canonical order, or "-" when empty.
  std::string to_string() const;
  /// Inverse of to_string(). Throws std::invalid_argument naming an unknown flag.
  static FlagSet parse(std::string_view text);

  friend constexpr bool operator==(FlagSet, FlagSet) = default;

 private:
  std::uint16_t bits_ = 0;
};

/// Ground truth attached to a packet. Only the evaluation harness reads it.
struct Label {
  bool attack = false;
  std::string name;

  static Label normal() { return {}; }
  static Label attack_named(std::string name) { return {true, std::move(name)}; }

  /// "normal" or "attack:<name>".
  std::string to_string() const;
  static Label parse(std::string_view text);

  friend bool operator==(const Label&, const Label&) = default;
};

struct PacketRecord {
  std::uint64_t seq_no = 0;
  Transport transport = Transport::Tcp;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  FlagSet flags;
  Label label;

  /// UDP packets carry no TCP control bits.
  bool well_formed() const { return transport == Transport::Tcp || !flags.has_tcp_flags(); }

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct PortRange {
  std::uint16_t lo = 0;
  std::uint16_t hi = 0;
  bool contains(std::uint16_t port) const { return port >= lo && port <= hi; }
  friend bool operator==(const PortRange&, const PortRange&) = default;
};

struct FlagMatcher {
  Flag flag;
  friend bool operator==(const FlagMatcher&, const FlagMatcher&) = default;
};

/// Fires when the destination port falls in any of the ranges.
struct PortSetMatcher {
  std::vector<PortRange> ranges;
  bool matches(std::uint16_t port) const;
  friend bool operator==(const PortSetMatcher&, const PortSetMatcher&) = default;
};

using FeatureMatcher = std::variant<FlagMatcher, PortSetMatcher>;

struct FeatureEntry {
  std::size_t index = 0;
  std::string name;
  FeatureMatcher matcher;
  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Ordered feature schema. Entry i drives bit i of every feature vector.
class FeatureSpec {
 public:
  /// Validates that indices run 0..n-1 without gaps or duplicates.
  explicit FeatureSpec(std::vector<FeatureEntry> entries);

  /// 11 header flags followed by 28 service ports, lv = 39.
  static const FeatureSpec& default_spec();

  std::size_t lv() const noexcept { return entries_.size(); }
  const std::vector<FeatureEntry>& entries() const noexcept { return entries_; }
  /// Index of the entry with the given name, if any.
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;

 private:
  std::vector<FeatureEntry> entries_;
};

FeatureVector featurize(const PacketRecord& p, const FeatureSpec& spec);

/// Error raised while reading a trace or feature-spec file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " at line " + std::to_string(line)), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parses the tab-separated trace text. seq_no is assigned 0,1,2,...
std::vector<PacketRecord> parse_trace(std::string_view text);
std::string format_trace(std::span<const PacketRecord> records);

std::vector<PacketRecord> load_trace(const std::filesystem::path& path);
void save_trace(std::span<const PacketRecord> records, const std::filesystem::path& path);

FeatureSpec parse_feature_spec(std::string_view text);
std::string format_feature_spec(const FeatureSpec& spec);
FeatureSpec load_feature_spec(const std::filesystem::path& path);

}  // namespace rabs
