#include "rabs/features.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <sstream>

#include "text_util.hpp"

namespace rabs {

namespace {

constexpr std::array<std::string_view, kFlagCount> kFlagNames = {
    "RB", "MF", "DF", "F1", "F2", "URG", "ACK", "PSH", "RST", "SYN", "FIN"};

constexpr std::uint16_t kTcpMask = 0x7F8;  // F1..FIN

PortSetMatcher ports(std::initializer_list<PortRange> r) { return PortSetMatcher{r}; }
PortRange one(std::uint16_t p) { return {p, p}; }

FeatureSpec build_default_spec() {
  std::vector<FeatureEntry> e;
  std::size_t i = 0;
  for (std::size_t f = 0; f < kFlagCount; ++f) {
    e.push_back({i++, std::string(kFlagNames[f]), FlagMatcher{static_cast<Flag>(f)}});
  }
  auto port = [&](std::string name, PortSetMatcher m) { e.push_back({i++, std::move(name), std::move(m)}); };
  port("Telnet", ports({one(23)}));
  port("SSH", ports({one(22)}));
  port("FTP", ports({{20, 21}}));
  port("Netbios", ports({{137, 139}, one(445)}));
  port("Rlogin", ports({one(513)}));
  port("RPC", ports({one(111)}));
  port("NFS", ports({one(2049)}));
  port("NNTP", ports({one(119)}));
  port("Lockd", ports({one(4045)}));
  port("Xwin", ports({{6000, 6063}}));
  port("DNS", ports({one(53)}));
  port("LDAP", ports({one(389)}));
  port("SMTP", ports({one(25)}));
  port("POP", ports({{109, 110}}));
  port("NTP", ports({one(123)}));
  port("IMAP", ports({one(143)}));
  port("HTTP", ports({one(80), one(8000)}));
  port("SSL", ports({one(443)}));
  port("px", ports({one(8080)}));
  port("Serv", ports({one(7)}));
  port("Time", ports({one(37)}));
  port("TFTP", ports({one(69)}));
  port("Finger", ports({one(79)}));
  port("lpd", ports({one(515)}));
  port("Syslog", ports({one(514)}));
  port("SNMP", ports({{161, 162}}));
  port("bgp", ports({one(179)}));
  port("Socks", ports({one(1080)}));
  return FeatureSpec(std::move(e));
}

std::string format_ranges(const PortSetMatcher& m) {
  std::string out;
  for (const auto& r : m.ranges) {
    if (!out.empty()) out += ',';
    out += std::to_string(r.lo);
    if (r.hi != r.lo) out += '-' + std::to_string(r.hi);
  }
  return out;
}

std::uint16_t parse_port(std::string_view s, std::size_t line) {
  auto v = detail::parse_number<unsigned>(s);
  if (!v || *v > 65535) throw ParseError("invalid port '" + std::string(detail::trim(s)) + "'", line);
  return static_cast<std::uint16_t>(*v);
}

}  // namespace

std::string_view flag_name(Flag f) { return kFlagNames[static_cast<std::size_t>(f)]; }

std::optional<Flag> parse_flag(std::string_view name) {
  for (std::size_t i = 0; i < kFlagCount; ++i) {
    if (kFlagNames[i] == name) return static_cast<Flag>(i);
  }
  return std::nullopt;
}

std::size_t FlagSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
bool FlagSet::has_tcp_flags() const { return (bits_ & kTcpMask) != 0; }

FlagSet FlagSet::ip_only() const {
  FlagSet out;
  out.bits_ = static_cast<std::uint16_t>(bits_ & ~kTcpMask);
  return out;
}

std::string FlagSet::to_string() const {
  if (empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < kFlagCount; ++i) {
    if (contains(static_cast<Flag>(i))) {
      if (!out.empty()) out += ',';
      out += kFlagNames[i];
    }
  }
  return out;
}

FlagSet FlagSet::parse(std::string_view text) {
  text = detail::trim(text);
  FlagSet out;
  if (text == "-" || text.empty()) return out;
  for (auto part : detail::split(text, ',')) {
    part = detail::trim(part);
    auto f = parse_flag(part);
    if (!f) throw std::invalid_argument("unknown flag " + std::string(part));
    out.insert(*f);
  }
  return out;
}

std::string Label::to_string() const { return attack ? "attack:" + name : "normal"; }

Label Label::parse(std::string_view text) {
  text = detail::trim(text);
  if (text == "normal") return normal();
  constexpr std::string_view prefix = "attack:";
  if (text.starts_with(prefix) && text.size() > prefix.size()) {
    return attack_named(std::string(text.substr(prefix.size())));
  }
  throw std::invalid_argument("invalid label '" + std::string(text) + "'");
}

bool PortSetMatcher::matches(std::uint16_t port) const {
  return std::any_of(ranges.begin(), ranges.end(), [port](const PortRange& r) { return r.contains(port); });
}

FeatureSpec::FeatureSpec(std::vector<FeatureEntry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].index != i) {
      throw std::invalid_argument("feature indices must be 0.." + std::to_string(entries_.size() - 1) +
                                  " without gaps or duplicates (problem at index " +
                                  std::to_string(entries_[i].index) + ")");
    }
  }
}

const FeatureSpec& FeatureSpec::default_spec() {
  static const FeatureSpec spec = build_default_spec();
  return spec;
}

std::optional<std::size_t> FeatureSpec::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.index;
  }
  return std::nullopt;
}

std::size_t FeatureSpec::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw std::out_of_range("no feature named " + std::string(name));
  return *i;
}

FeatureVector featurize(const PacketRecord& p, const FeatureSpec& spec) {
  FeatureVector v(spec.lv());
  for (const auto& e : spec.entries()) {
    const bool fires = std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, FlagMatcher>) {
            return p.flags.contains(m.flag);
          } else {
            return m.matches(p.dst_port);
          }
        },
        e.matcher);
    if (fires) v.set(e.index);
  }
  return v;
}

std::vector<PacketRecord> parse_trace(std::string_view text) {
  std::vector<PacketRecord> out;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() != 5) {
      throw ParseError("expected 5 tab-separated fields, found " + std::to_string(fields.size()), line_no);
    }
    PacketRecord r;
    const auto proto = detail::trim(fields[0]);
    if (proto == "TCP") {
      r.transport = Transport::Tcp;
    } else if (proto == "UDP") {
      r.transport = Transport::Udp;
    } else {
      throw ParseError("unknown protocol " + std::string(proto), line_no);
    }
    r.src_port = parse_port(fields[1], line_no);
    r.dst_port = parse_port(fields[2], line_no);
    try {
      r.flags = FlagSet::parse(fields[3]);
      r.label = Label::parse(fields[4]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!r.well_formed()) throw ParseError("UDP record carries TCP flags", line_no);
    r.seq_no = out.size();
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_trace(std::span<const PacketRecord> records) {
  std::string out = "# proto\tsrc_port\tdst_port\tflags\tlabel\n";
  for (const auto& r : records) {
    out += r.transport == Transport::Tcp ? "TCP" : "UDP";
    out += '\t' + std::to_string(r.src_port);
    out += '\t' + std::to_string(r.dst_port);
    out += '\t' + r.flags.to_string();
    out += '\t' + r.label.to_string();
    out += '\n';
  }
  return out;
}

std::vector<PacketRecord> load_trace(const std::filesystem::path& path) {
  return parse_trace(detail::read_file(path));
}

void save_trace(std::span<const PacketRecord> records, const std::filesystem::path& path) {
  detail::write_file(path, format_trace(records));
}

FeatureSpec parse_feature_spec(std::string_view text) {
  std::vector<FeatureEntry> entries;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError("expected 4 tab-separated fields, found " + std::to_string(fields.size()), line_no);
    }
    FeatureEntry e;
    auto idx = detail::parse_number<std::size_t>(fields[0]);
    if (!idx) throw ParseError("invalid index", line_no);
    e.index = *idx;
    e.name = std::string(detail::trim(fields[1]));
    const auto kind = detail::trim(fields[2]);
    const auto value = detail::trim(fields[3]);
    if (kind == "flag") {
      auto f = parse_flag(value);
      if (!f) throw ParseError("unknown flag " + std::string(value), line_no);
      e.matcher = FlagMatcher{*f};
    } else if (kind == "port") {
      PortSetMatcher m;
      for (auto part : detail::split(value, ',')) {
        auto dash = part.find('-');
        if (dash == std::string_view::npos) {
          m.ranges.push_back(one(parse_port(part, line_no)));
        } else {
          PortRange r{parse_port(part.substr(0, dash), line_no), parse_port(part.substr(dash + 1), line_no)};
          if (r.lo > r.hi) throw ParseError("empty port range", line_no);
          m.ranges.push_back(r);
        }
      }
      e.matcher = std::move(m);
    } else {
      throw ParseError("unknown feature kind " + std::string(kind), line_no);
    }
    entries.push_back(std::move(e));
  }
  try {
    return FeatureSpec(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_no);
  }
}

std::string format_feature_spec(const FeatureSpec& spec) {
  std::string out = "# index\tname\tkind\tvalue\n";
  for (const auto& e : spec.entries()) {
    out += std::to_string(e.index) + '\t' + e.name + '\t';
    if (const auto* f = std::get_if<FlagMatcher>(&e.matcher)) {
      out += "flag\t" + std::string(flag_name(f->flag));
    } else {
      out += "port\t" + format_ranges(std::get<PortSetMatcher>(e.matcher));
    }
    out += '\n';
  }
  return out;
}

FeatureSpec load_feature_spec(const std::filesystem::path& path) {
  return parse_feature_spec(detail::read_file(path));
}

}  // namespace rabs
