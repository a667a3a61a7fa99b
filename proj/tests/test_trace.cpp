#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "afp/bus_sim.hpp"
#include "afp/fir.hpp"
#include "afp/trace.hpp"

using namespace afp;

namespace {

Trace ramp_trace(std::size_t n) {
  Trace t;
  for (std::size_t i = 0; i < n; ++i) t.samples.push_back(std::sin(0.01 * static_cast<double>(i)) * 3.0 + 0.25);
  t.word_starts = {0, n / 2};
  return t;
}

}  // namespace

TEST(TraceIo, RoundTripF32) {
  const Trace t = ramp_trace(1000);
  std::stringstream ss;
  write_trace(ss, t, TraceEncoding::f32le);
  const Trace r = read_trace(ss);
  EXPECT_EQ(r.word_starts, t.word_starts);
  EXPECT_DOUBLE_EQ(r.sample_rate, t.sample_rate);
  ASSERT_EQ(r.samples.size(), t.samples.size());
  for (std::size_t i = 0; i < t.samples.size(); ++i)
    EXPECT_EQ(r.samples[i], static_cast<double>(static_cast<float>(t.samples[i])));
}

TEST(TraceIo, RoundTripCsv) {
  const Trace t = ramp_trace(300);
  std::stringstream ss;
  write_trace(ss, t, TraceEncoding::csv);
  const Trace r = read_trace(ss);
  ASSERT_EQ(r.samples.size(), t.samples.size());
  for (std::size_t i = 0; i < t.samples.size(); ++i) EXPECT_NEAR(r.samples[i], t.samples[i], 1e-12);
}

TEST(TraceIo, RejectsBadHeaders) {
  std::stringstream unknown(
      R"({"sample_rate":5e6,"bit_rate":1e5,"word_starts":[],"sample_count":0,"encoding":"csv","x":1})"
      "\n");
  EXPECT_THROW(read_trace(unknown), ConfigError);
  std::stringstream missing(R"({"sample_rate":5e6})" "\n");
  EXPECT_THROW(read_trace(missing), ConfigError);
  std::stringstream truncated(
      R"({"sample_rate":5e6,"bit_rate":1e5,"word_starts":[],"sample_count":4,"encoding":"f32le"})"
      "\nab");
  EXPECT_THROW(read_trace(truncated), ConfigError);
  std::stringstream oob(
      R"({"sample_rate":5e6,"bit_rate":1e5,"word_starts":[3],"sample_count":1,"encoding":"csv"})"
      "\n0,1.0\n");
  EXPECT_THROW(read_trace(oob), ConfigError);
}

TEST(Fir, LowpassHasUnitDcGainAndSymmetry) {
  const auto h = fir::design_lowpass(30, 0.2);
  double sum = 0;
  for (double c : h) sum += c;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(h[i], h[h.size() - 1 - i], 1e-15);
}

TEST(Fir, StopbandAttenuation) {
  const auto h = fir::design_lowpass(30, 0.2);
  // |H(f)| at 0.6 of Nyquist, well inside the stopband.
  const double w = 0.6 * std::numbers::pi;
  double re = 0, im = 0;
  for (std::size_t n = 0; n < h.size(); ++n) {
    re += h[n] * std::cos(w * static_cast<double>(n));
    im -= h[n] * std::sin(w * static_cast<double>(n));
  }
  EXPECT_LT(std::hypot(re, im), 0.01);
}

TEST(Decimate, FactorOneIsIdentity) {
  const Trace t = ramp_trace(200);
  const Trace r = decimate(t, 1, 30);
  EXPECT_EQ(r.samples, t.samples);
  EXPECT_EQ(r.word_starts, t.word_starts);
}

TEST(Decimate, PreservesSlowSignalAndScalesIndices) {
  Trace t;
  t.sample_rate = 50e6;
  for (int i = 0; i < 5000; ++i) t.samples.push_back(std::sin(2 * std::numbers::pi * 100e3 * i / 50e6));
  t.word_starts = {0, 1000, 2500};
  const Trace r = decimate(t, 10, 30);
  EXPECT_DOUBLE_EQ(r.sample_rate, 5e6);
  EXPECT_EQ(r.samples.size(), 500u);
  EXPECT_EQ(r.word_starts, (std::vector<std::size_t>{0, 100, 250}));
  // An even tap count leaves the filter centred half an input sample late.
  for (std::size_t m = 20; m < 480; ++m)
    EXPECT_NEAR(r.samples[m], std::sin(2 * std::numbers::pi * 100e3 * (m * 10 + 0.5) / 50e6), 2e-3) << m;
}

TEST(Decimate, RejectsBadArguments) {
  const Trace t = ramp_trace(100);
  EXPECT_THROW(decimate(t, 0, 30), InvalidArgument);
  EXPECT_THROW(decimate(t, 10, 5), InvalidArgument);
  EXPECT_THROW(decimate(ramp_trace(10), 2, 30), InvalidArgument);
}
