#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "afp/bus_sim.hpp"

using namespace afp;

namespace {

TransmitterProfile quiet() {
  TransmitterProfile p;
  p.noise_sigma = 0.0;
  p.timing_jitter = 0.0;
  return p;
}

SynthesisOptions fixed_phase(int spb = kDefaultSamplesPerBit) {
  SynthesisOptions o;
  o.samples_per_bit = spb;
  o.random_phase = false;
  return o;
}

}  // namespace

TEST(BusSim, LayoutAndDeterminism) {
  const std::vector<ArincWord> words(kReferenceWords.begin(), kReferenceWords.end());
  const Trace a = synthesize_stream(TransmitterProfile{}, {}, words, 4, 42);
  const Trace b = synthesize_stream(TransmitterProfile{}, {}, words, 4, 42);
  const Trace c = synthesize_stream(TransmitterProfile{}, {}, words, 4, 43);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  EXPECT_EQ(a.samples.size(), 6u * 36 * 50);
  for (std::size_t w = 0; w < 6; ++w) EXPECT_EQ(a.word_starts[w], w * 36 * 50);
  EXPECT_DOUBLE_EQ(a.sample_rate, 5e6);
}

TEST(BusSim, PlateausSettleAtProfileLevels) {
  TransmitterProfile p = quiet();
  p.hi_volts = 10.3;
  p.lo_volts = -9.7;
  p.overshoot_frac = 0.0;
  p.null_shape_gain = 0.0;
  const Trace t = synthesize_word(p, {}, {0xFFFF0000u}, 1, fixed_phase());
  // Late in the pulse of bit 0 (a one) and bit 31 (a zero).
  EXPECT_NEAR(t.samples[23], 10.3, 0.05);
  EXPECT_NEAR(t.samples[31 * 50 + 23], -9.7, 0.05);
  // Settled NULL between bits.
  EXPECT_NEAR(t.samples[33 * 50 + 25], 0.0, 1e-3);
}

TEST(BusSim, LoadGainScalesWaveform) {
  const TransmitterProfile p = quiet();
  const Trace a = synthesize_word(p, {{1e9, 1.0}}, {0x5A5A5A5Au}, 1, fixed_phase());
  const Trace b = synthesize_word(p, {{1e9, 0.9}}, {0x5A5A5A5Au}, 1, fixed_phase());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_NEAR(b.samples[i], 0.9 * a.samples[i], 1e-9);
}

TEST(BusSim, RiseTimeIsTenToNinety) {
  TransmitterProfile p = quiet();
  p.overshoot_frac = 0.0;
  p.null_shape_gain = 0.0;
  p.rise_time = 1.2e-6;
  const Trace t = synthesize_word(p, {}, {0xFFFFFFFFu}, 1, fixed_phase(1000));
  const double dt = t.sample_interval();
  std::size_t i10 = 0, i90 = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    if (!i10 && t.samples[i] >= 1.0) i10 = i;
    if (!i90 && t.samples[i] >= 9.0) i90 = i;
  }
  EXPECT_NEAR(static_cast<double>(i90 - i10) * dt, 1.2e-6, 2 * dt);
}

TEST(BusSim, LowerLoadCutoffSlowsEdges) {
  TransmitterProfile p = quiet();
  const Trace fast = synthesize_word(p, {{20e6, 1.0}}, {0xFFFFFFFFu}, 1, fixed_phase());
  const Trace slow = synthesize_word(p, {{1e6, 1.0}}, {0xFFFFFFFFu}, 1, fixed_phase());
  EXPECT_GT(fast.samples[5], slow.samples[5]);
}

TEST(BusSim, NoiseHasProfileSigma) {
  TransmitterProfile p = quiet();
  p.noise_sigma = 0.2;
  const Trace noisy = synthesize_word(p, {}, {0x0u}, 7, fixed_phase());
  const Trace clean = synthesize_word(quiet(), {}, {0x0u}, 7, fixed_phase());
  double s2 = 0;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) s2 += std::pow(noisy.samples[i] - clean.samples[i], 2);
  EXPECT_NEAR(std::sqrt(s2 / static_cast<double>(clean.samples.size())), 0.2, 0.01);
}

TEST(BusSim, RejectsInvalidConfiguration) {
  TransmitterProfile p;
  p.hi_volts = 12.0;
  EXPECT_THROW(synthesize_word(p, {}, {0u}, 1), InvalidArgument);
  p = {};
  p.rise_time = 3e-6;
  EXPECT_THROW(synthesize_word(p, {}, {0u}, 1), InvalidArgument);
  EXPECT_THROW(synthesize_word(TransmitterProfile{}, {{50e3, 1.0}}, {0u}, 1), InvalidArgument);
  const std::vector<ArincWord> w{{0u}};
  EXPECT_THROW(synthesize_stream(TransmitterProfile{}, {}, w, 3, 1), InvalidArgument);
}
