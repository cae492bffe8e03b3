#include <gtest/gtest.h>

#include "rabs/config.hpp"

using namespace rabs;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, Minimal) {
  const auto cfg = parse_config("version = 1\n");
  EXPECT_EQ(cfg.replicates, 10U);
  EXPECT_EQ(cfg.script_name, "four-phase");
  EXPECT_EQ(cfg.script, synth::standard_script(synth::ScriptKind::FourPhase, "dos-land-like"));
  EXPECT_EQ(cfg.models.size(), 2U);
}

TEST(Config, FullExample) {
  const auto cfg = parse_config(R"(version = 1
# comment
[experiment]
models = rabs
script = two-phase
attack = quiet
replicates = 3
seed = 17
out = res

[energy]
break_even = 0.9
fit_threshold = 55

[rabs]
n_size = 150
expose_when_inhibited = true

[abs]
window = 40
burn_in = 0.25

[profile.quiet]
transport = TCP:1
ports = 22:0.5, 80:0.5
flags = RST+FIN:0.5, -:0.5
)",
                                "/base");
  EXPECT_EQ(cfg.models, std::vector<harness::Model>{harness::Model::Rabs});
  EXPECT_EQ(cfg.replicates, 3U);
  EXPECT_EQ(cfg.seed, 17U);
  EXPECT_EQ(cfg.out_dir, std::filesystem::path("/base/res"));
  EXPECT_DOUBLE_EQ(cfg.setup.rabs.energy.break_even, 0.9);
  EXPECT_DOUBLE_EQ(cfg.setup.abs_energy.fit_threshold, 55.0);
  EXPECT_EQ(cfg.setup.rabs.n_size, 150U);
  EXPECT_TRUE(cfg.setup.rabs.expose_when_inhibited);
  EXPECT_EQ(cfg.setup.abs.window, 40U);
  EXPECT_DOUBLE_EQ(cfg.setup.abs_burn_in, 0.25);
  const auto& q = cfg.setup.profiles.at("quiet");
  EXPECT_TRUE(q.label.attack);
  EXPECT_EQ(q.flag_mix[0].first, FlagSet::parse("RST,FIN"));
  EXPECT_EQ(q.flag_mix[1].first, FlagSet{});
  EXPECT_EQ(cfg.script.segments.size(), 2U);
  EXPECT_EQ(cfg.script.segments[1].profile, "quiet");
}

TEST(Config, CustomSegments) {
  const auto cfg = parse_config("version = 1\n[experiment]\nsegments = normal:100, dos-storm-like:20\n");
  EXPECT_EQ(cfg.script_name, "custom");
  EXPECT_EQ(cfg.script.total(), 120U);
}

TEST(Config, Errors) {
  EXPECT_NE(error_of("[experiment]\nseed = 1\n").find("version"), std::string::npos);
  EXPECT_NE(error_of("version = 2\n").find("unsupported"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[rabs]\nds_treshold = 3\n").find("ds_treshold"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[bogus]\n").find("bogus"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[rabs]\nn_size = 3\nn_size = 4\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[rabs]\nn_size = many\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[experiment]\nattack = missing-profile\n").find("missing-profile"),
            std::string::npos);
  // energy_thres >= Mem_thres
  EXPECT_NE(error_of("version = 1\n[energy]\nfit_threshold = 95\n").find("fit_threshold"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[profile.x]\ntransport = TCP:1\nflags = -:1\nports = 80:0.4\n").find("sums"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[experiment]\nreplicates = 0\n").find("replicates"), std::string::npos);
  EXPECT_NE(error_of("version = 1\n[experiment]\nfeature_spec = /no/such/spec.tsv\n").find("not found"),
            std::string::npos);
  EXPECT_THROW(load_config("/no/such/config.ini"), ConfigError);
}
