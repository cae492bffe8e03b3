#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rabs/reactive.hpp"

namespace rabs {

inline constexpr std::string_view kSnapshotFormat = "rabs-snapshot";
inline constexpr int kSnapshotVersion = 1;

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Self-describing JSON dump of the whole engine state, random stream included.
std::string snapshot_to_string(const reactive::EngineState& state);
/// Throws SnapshotError on a wrong format tag, unsupported version or malformed content.
reactive::EngineState snapshot_from_string(std::string_view text);

void save_snapshot(const reactive::EngineState& state, const std::filesystem::path& path);
reactive::EngineState load_snapshot(const std::filesystem::path& path);

/// FNV-1a over the canonical snapshot text, as 16 hex digits.
std::string state_digest(const reactive::EngineState& state);

}  // namespace rabs
