#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rabs/harness.hpp"
#include "rabs/synth.hpp"

namespace rabs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed experiment configuration file.
///
///   version = 1
///   [experiment]  models, script, attack, normal_length, attack_length, segments,
///                 replicates, seed, feature_spec, out
///   [energy]      initial, max, gain, break_even, fit_threshold, mature_threshold
///   [rabs]        every RabsConfig field by name
///   [abs]         phi, epsilon, reproduction_energy, population_size, particle_capacity,
///                 window, k, delta_floor, burn_in
///   [profile.N]   transport, ports, flags, label
///
/// Unknown sections and keys are errors.
struct ExperimentConfig {
  std::vector<harness::Model> models{harness::Model::Abs, harness::Model::Rabs};
  std::string script_name = "four-phase";
  synth::PhaseScript script;
  harness::ExperimentSetup setup;
  std::size_t replicates = 10;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> feature_spec_path;
  std::filesystem::path out_dir = "results";
};

/// Relative paths in the text are resolved against `base_dir`. Throws ConfigError.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Default configuration (four-phase script against dos-land-like).
ExperimentConfig default_config();

}  // namespace rabs
