#include <gtest/gtest.h>

#include <filesystem>

#include "rabs/harness.hpp"
#include "rabs/snapshot.hpp"

using namespace rabs;
using namespace rabs::reactive;

namespace {

std::vector<PacketRecord> trace(std::uint64_t seed) {
  return harness::make_trace(synth::standard_script(synth::ScriptKind::FourPhase, "r2l-tunnel-like"),
                             synth::default_profiles(), seed);
}

}  // namespace

TEST(Snapshot, RoundTripPreservesDigest) {
  const auto t = trace(1);
  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 1);
  for (std::size_t i = 0; i < 2600; ++i) e.process(t[i]);
  const auto text = snapshot_to_string(e.state());
  const auto back = snapshot_from_string(text);
  EXPECT_EQ(snapshot_to_string(back), text);
  EXPECT_EQ(state_digest(back), state_digest(e.state()));
  EXPECT_EQ(back.rng, e.state().rng);
}

TEST(Snapshot, ResumeReplaysVerdicts) {
  const auto t = trace(2);
  RabsEngine straight(RabsConfig{}, FeatureSpec::default_spec(), 2);
  std::vector<PacketOutcome> expected;
  for (const auto& p : t) expected.push_back(straight.process(p));

  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 2);
  std::vector<PacketOutcome> got;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i % 700 == 0) e = RabsEngine(snapshot_from_string(snapshot_to_string(e.state())));
    got.push_back(e.process(t[i]));
  }
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    ASSERT_EQ(got[i].verdict, expected[i].verdict) << i;
    ASSERT_EQ(got[i].signals, expected[i].signals) << i;
  }
  EXPECT_EQ(state_digest(e.state()), state_digest(straight.state()));
}

TEST(Snapshot, FileRoundTrip) {
  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 3);
  const auto path = std::filesystem::temp_directory_path() / "rabs_snapshot_test.json";
  save_snapshot(e.state(), path);
  EXPECT_EQ(state_digest(load_snapshot(path)), state_digest(e.state()));
  std::filesystem::remove(path);
}

TEST(Snapshot, Errors) {
  EXPECT_THROW(snapshot_from_string("not json"), SnapshotError);
  EXPECT_THROW(snapshot_from_string(R"({"format":"other","version":1})"), SnapshotError);
  RabsEngine e(RabsConfig{}, FeatureSpec::default_spec(), 4);
  auto text = snapshot_to_string(e.state());
  const auto pos = text.find("\"version\": 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "\"version\": 9");
  EXPECT_THROW(snapshot_from_string(text), SnapshotError);
  EXPECT_THROW(load_snapshot("/no/such/snapshot.json"), SnapshotError);
}
