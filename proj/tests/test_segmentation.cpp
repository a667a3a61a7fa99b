#include <gtest/gtest.h>

#include "afp/bus_sim.hpp"
#include "afp/rng.hpp"
#include "afp/segmentation.hpp"
#include "oracles.hpp"

using namespace afp;

namespace {

std::vector<SegmentType> types_of(const WordSegments& segs) {
  std::vector<SegmentType> out;
  for (const auto& s : segs) out.push_back(s.seg_type);
  return out;
}

// Hand-built trace from (value, count) runs.
Trace runs(std::initializer_list<std::pair<double, int>> parts) {
  Trace t;
  for (auto [v, n] : parts) t.samples.insert(t.samples.end(), static_cast<std::size_t>(n), v);
  t.word_starts = {0};
  return t;
}

}  // namespace

TEST(Segmentation, ReferenceWordsMatchBitPatternCensus) {
  for (auto w : kReferenceWords) {
    const Trace t = synthesize_word(TransmitterProfile{}, {}, w, 1);
    const auto segs = segment_word(t, 0);
    ASSERT_EQ(segs.size(), kSegmentsPerWord) << format_word(w);
    EXPECT_EQ(types_of(segs), oracle::segment_types(w)) << format_word(w);
  }
}

TEST(Segmentation, RandomWordsMatchCensus) {
  Rng rng(17);
  const WaveformSynthesizer synth(TransmitterProfile{}, {});
  for (int i = 0; i < 300; ++i) {
    const ArincWord w{static_cast<std::uint32_t>(rng.next_u64())};
    const Trace t = synth.word(w, rng.next_u64());
    EXPECT_EQ(types_of(segment_word(t, 0)), oracle::segment_types(w)) << format_word(w);
  }
}

TEST(Segmentation, SegmentsTileTheWordContiguously) {
  const Trace t = synthesize_word(TransmitterProfile{}, {}, {0x5A5A5A5Au}, 3);
  const auto segs = segment_word(t, 0);
  for (std::size_t i = 1; i < segs.size(); ++i)
    EXPECT_EQ(segs[i].start_index, segs[i - 1].start_index + segs[i - 1].samples.size());
  for (const auto& s : segs) {
    EXPECT_GE(s.samples.size(), is_transition(s.seg_type) ? 4u : 17u) << to_string(s.seg_type);
    EXPECT_LE(s.samples.size(), 50u);
  }
}

TEST(Segmentation, RobustUnderNoise) {
  TransmitterProfile p;
  p.noise_sigma = 0.2;
  const WaveformSynthesizer synth(p, {});
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    for (auto w : kReferenceWords) {
      const Trace t = synth.word(w, seed);
      EXPECT_EQ(types_of(segment_word(t, 0)), oracle::segment_types(w));
    }
}

TEST(Segmentation, HysteresisAbsorbsChatterNearThresholds) {
  // One bit "1": the HI plateau dips to 7.5 (between h2=7.2 and h1=8) without ending.
  Trace t = runs({{0.0, 5}, {5.0, 2}, {9.0, 8}, {7.5, 1}, {9.0, 8}, {5.0, 2}, {0.0, 20}});
  // Complete the remaining 31 bits.
  for (int b = 1; b < 32; ++b)
    for (auto [v, n] : {std::pair{5.0, 2}, {9.0, 16}, {5.0, 2}, {0.0, 20}})
      t.samples.insert(t.samples.end(), static_cast<std::size_t>(n), v);
  const auto segs = segment_word(t, 0);
  ASSERT_EQ(segs.size(), kSegmentsPerWord);
  EXPECT_EQ(segs[1].seg_type, SegmentType::HI);
  EXPECT_EQ(segs[1].samples.size(), 17u);
}

TEST(Segmentation, MalformedSignals) {
  // Word starting on a plateau.
  EXPECT_THROW(segment_word(runs({{9.0, 2000}}), 0), MalformedSignal);
  // Rising edge that falls back to NULL before reaching HI.
  EXPECT_THROW(segment_word(runs({{0.0, 5}, {5.0, 3}, {0.0, 2000}}), 0), MalformedSignal);
  // Silence: no bits at all.
  EXPECT_THROW(segment_word(runs({{0.0, 2000}}), 0), MalformedSignal);
  // Truncated word.
  const Trace full = synthesize_word(TransmitterProfile{}, {}, {0xAAAAAAAAu}, 1);
  Trace cut = full;
  cut.samples.resize(20 * 50);
  try {
    segment_word(cut, 0);
    FAIL();
  } catch (const MalformedSignal& e) {
    EXPECT_FALSE(e.word_index().has_value());
  }
}

TEST(Segmentation, StreamErrorsCarryWordIndex) {
  const std::vector<ArincWord> words{{0x1u}, {0x2u}, {0x3u}};
  Trace t = synthesize_stream(TransmitterProfile{}, {}, words, 4, 5);
  for (std::size_t i = t.word_starts[2] + 100; i < t.samples.size(); ++i) t.samples[i] = 0.0;
  try {
    segment_stream(t);
    FAIL();
  } catch (const MalformedSignal& e) {
    ASSERT_TRUE(e.word_index().has_value());
    EXPECT_EQ(*e.word_index(), 2u);
  }
}

TEST(Segmentation, RejectsUnorderedThresholds) {
  const Trace t = synthesize_word(TransmitterProfile{}, {}, {0u}, 1);
  EXPECT_THROW(segment_word(t, 0, Thresholds{3.0, 2.8, 8.0, 7.2}), InvalidArgument);
}
