#include <gtest/gtest.h>

#include "afp/bus_sim.hpp"
#include "afp/json_io.hpp"

using namespace afp;
using io::json;

TEST(JsonIo, ScenarioRoundTrip) {
  Scenario sc = rx_switch_scenario(12);
  sc.words = {{0x1u}, {0xDEADBEEFu}};
  sc.lof.k = 15;
  const Scenario back = io::scenario_from_json(io::to_json(sc));
  EXPECT_EQ(back.guarded, sc.guarded);
  EXPECT_EQ(back.rogue_variants, sc.rogue_variants);
  EXPECT_EQ(back.words, sc.words);
  EXPECT_EQ(back.lof.k, 15);
  EXPECT_EQ(back.attack_kind, AttackKind::rx_switch);
  EXPECT_EQ(io::to_json(back).dump(), io::to_json(sc).dump());
}

TEST(JsonIo, ScenarioDefaultsAndStrictKeys) {
  const json minimal = json::parse(R"({"guarded_tx": {}, "rogue_variants": [{"tx": {"hi_volts": 10.5}}]})");
  const Scenario sc = io::scenario_from_json(minimal);
  EXPECT_EQ(sc.words_per_device, 4920);
  EXPECT_DOUBLE_EQ(sc.rogue_variants[0].tx.hi_volts, 10.5);
  json bad = minimal;
  bad["colour"] = "blue";
  EXPECT_THROW(io::scenario_from_json(bad), ConfigError);
  bad = minimal;
  bad["guarded_tx"]["hi_volt"] = 10;
  EXPECT_THROW(io::scenario_from_json(bad), ConfigError);
  bad = minimal;
  bad["words_per_device"] = 10;
  EXPECT_THROW(io::scenario_from_json(bad), ConfigError);
  bad = minimal;
  bad["words_per_device"] = "many";
  EXPECT_THROW(io::scenario_from_json(bad), ConfigError);
  bad = minimal;
  bad["rogue_variants"] = json::array();
  EXPECT_THROW(io::scenario_from_json(bad), ConfigError);
  bad = minimal;
  bad["attack_kind"] = "teleport";
  EXPECT_THROW(io::scenario_from_json(bad), ConfigError);
}

TEST(JsonIo, DetectorRoundTripPreservesDecisions) {
  const WaveformSynthesizer synth(TransmitterProfile{}, {});
  std::vector<WordSegments> words;
  for (std::size_t i = 0; i < 210; ++i) words.push_back(segment_word(synth.word(kReferenceWords[i % 6], i), 0));
  const auto det = train_detector(words, FeatureSetId::POLYNOMIAL, 90);
  const auto back = io::detector_from_json(json::parse(io::to_json(det).dump()));
  EXPECT_EQ(back.set_id, det.set_id);
  EXPECT_EQ(back.t_votes, 90);
  ASSERT_EQ(back.models.size(), det.models.size());
  for (const auto& [t, m] : det.models) {
    EXPECT_EQ(back.models.at(t).threshold, m.threshold);
    EXPECT_EQ(back.models.at(t).lrd, m.lrd);
  }
  TransmitterProfile other;
  other.hi_volts = 10.2;
  const WaveformSynthesizer rogue(other, {});
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto w = segment_word(rogue.word({0x5A5A5A5Au}, 1000 + s), 0);
    EXPECT_EQ(classify_word(back, w).normal_votes, classify_word(det, w).normal_votes);
  }
}

TEST(JsonIo, TamperedModelRejected) {
  Rng rng(1);
  std::vector<std::vector<double>> pts(40, std::vector<double>(3));
  for (auto& p : pts)
    for (double& v : p) v = rng.normal();
  json j = io::to_json(lof_fit(pts, {}));
  j["threshold"] = 99.0;
  EXPECT_THROW(io::lof_model_from_json(j), ConfigError);
  j = io::to_json(lof_fit(pts, {}));
  j["training"].erase(0);
  EXPECT_THROW(io::lof_model_from_json(j), ConfigError);
}
