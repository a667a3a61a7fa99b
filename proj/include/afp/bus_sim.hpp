#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/fir.hpp"
#include "afp/rng.hpp"
#include "afp/trace.hpp"
#include "afp/word_codec.hpp"

namespace afp {

// Analog characteristics of one transmitter LRU. Rise and fall times are 10%-90%.
struct TransmitterProfile {
  double hi_volts = 10.0;
  double lo_volts = -10.0;
  double null_volts = 0.0;
  double rise_time = 1.5e-6;
  double fall_time = 1.5e-6;
  double overshoot_frac = 0.04;
  double ringing_freq = 800e3;
  double ringing_damping = 0.6;  // envelope decay exponent per ringing cycle
  double null_shape_gain = 0.3;
  double timing_jitter = 2e-9;
  double noise_sigma = 0.05;
  double bit_rate = kDefaultBitRate;

  friend bool operator==(const TransmitterProfile&, const TransmitterProfile&) = default;
};

// A receiver and its stretch of line, modelled as a one-pole low-pass with a gain.
struct ReceiverLoad {
  double cutoff_freq = 4e6;
  double gain = 1.0;

  friend bool operator==(const ReceiverLoad&, const ReceiverLoad&) = default;
};

inline void validate(const TransmitterProfile& p) {
  auto fail = [](const std::string& m) { throw InvalidArgument("transmitter profile: " + m); };
  if (!(p.bit_rate > 0.0)) fail("bit_rate must be positive");
  if (!(p.hi_volts >= 9.0 && p.hi_volts <= 11.0)) fail("hi_volts outside [9, 11]");
  if (!(p.lo_volts >= -11.0 && p.lo_volts <= -9.0)) fail("lo_volts outside [-11, -9]");
  if (!(std::abs(p.null_volts) <= 0.5)) fail("|null_volts| > 0.5");
  const double quarter_bit = 0.25 / p.bit_rate;
  if (!(p.rise_time > 0.0 && p.rise_time < quarter_bit)) fail("rise_time must be in (0, 0.25 bit)");
  if (!(p.fall_time > 0.0 && p.fall_time < quarter_bit)) fail("fall_time must be in (0, 0.25 bit)");
  if (!(p.overshoot_frac >= 0.0 && p.overshoot_frac < 0.5)) fail("overshoot_frac outside [0, 0.5)");
  if (!(p.ringing_freq > 0.0)) fail("ringing_freq must be positive");
  if (!(p.ringing_damping >= 0.0)) fail("ringing_damping must be non-negative");
  if (!(std::abs(p.null_shape_gain) < 1.5)) fail("|null_shape_gain| must stay below 1.5 V");
  if (!(p.timing_jitter >= 0.0)) fail("timing_jitter must be non-negative");
  if (!(p.noise_sigma >= 0.0)) fail("noise_sigma must be non-negative");
}

inline void validate(const ReceiverLoad& l, double bit_rate) {
  if (!(l.cutoff_freq > bit_rate))
    throw InvalidArgument("receiver load cutoff must exceed the bit rate");
  if (!(l.gain > 0.0)) throw InvalidArgument("receiver load gain must be positive");
}

struct SynthesisOptions {
  int samples_per_bit = kDefaultSamplesPerBit;
  // Draw a fresh sub-sample phase per word, as an asynchronous acquisition clock would.
  bool random_phase = true;
};

namespace detail {

// Ratio between the full raised-cosine ramp duration and its 10%-90% time.
inline double ramp_duration(double rise_10_90) {
  const double x10 = std::acos(0.8) / std::numbers::pi;
  return rise_10_90 / (1.0 - 2.0 * x10);
}

// Normalized 0 -> 1 edge response minus one, tabulated on a fine grid.
class EdgeTable {
 public:
  EdgeTable() = default;
  EdgeTable(double ramp, const TransmitterProfile& p, std::span<const ReceiverLoad> loads,
            double step, double support)
      : step_(step) {
    const auto n = static_cast<std::size_t>(std::ceil(support / step)) + 2;
    std::vector<double> g(n);
    const double omega = 2.0 * std::numbers::pi * p.ringing_freq;
    const double decay = p.ringing_damping * p.ringing_freq;
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = static_cast<double>(i) * step;
      if (tau < ramp) {
        g[i] = 0.5 - 0.5 * std::cos(std::numbers::pi * tau / ramp);
      } else {
        const double u = tau - ramp;
        g[i] = 1.0 + p.overshoot_frac * std::exp(-decay * u) * std::sin(omega * u);
      }
    }
    for (const ReceiverLoad& load : loads) {
      const double alpha = 1.0 - std::exp(-2.0 * std::numbers::pi * load.cutoff_freq * step);
      double y = 0.0;
      for (double& v : g) {
        y += alpha * (v - y);
        v = y;
      }
    }
    table_.resize(n);
    for (std::size_t i = 0; i < n; ++i) table_[i] = g[i] - 1.0;
    table_.back() = 0.0;
    support_ = static_cast<double>(n - 1) * step;
  }

  double support() const { return support_; }

  // tau >= 0 assumed.
  double operator()(double tau) const {
    if (tau >= support_) return 0.0;
    const double pos = tau / step_;
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    const double a = table_[i];
    const double b = table_[i + 1];
    return a == b ? a : a + (b - a) * f;
  }

 private:
  double step_ = 1.0;
  double support_ = 0.0;
  std::vector<double> table_;
};

struct Edge {
  double time;
  double swing;
  double level_after;
  bool rising;
};

struct Bump {
  double begin;
  double end;
  double amplitude;
};

}  // namespace detail

// Renders BRTZ waveforms for one (transmitter, loads) configuration. Construction
// precomputes the edge responses, so reuse one instance for many words.
class WaveformSynthesizer {
 public:
  static constexpr int kFineStepsPerBit = 4000;
  static constexpr double kSupportBits = 4.0;

  WaveformSynthesizer(TransmitterProfile tx, std::vector<ReceiverLoad> loads,
                      SynthesisOptions opts = {})
      : tx_(tx), loads_(std::move(loads)), opts_(opts) {
    validate(tx_);
    for (const auto& l : loads_) validate(l, tx_.bit_rate);
    if (opts_.samples_per_bit < 4) throw InvalidArgument("samples_per_bit must be at least 4");
    bit_period_ = 1.0 / tx_.bit_rate;
    sample_rate_ = tx_.bit_rate * opts_.samples_per_bit;
    rise_ramp_ = detail::ramp_duration(tx_.rise_time);
    fall_ramp_ = detail::ramp_duration(tx_.fall_time);
    const double step = bit_period_ / kFineStepsPerBit;
    const double support = kSupportBits * bit_period_;
    rise_ = detail::EdgeTable(rise_ramp_, tx_, loads_, step, support);
    fall_ = detail::EdgeTable(fall_ramp_, tx_, loads_, step, support);
    gain_ = 1.0;
    for (const auto& l : loads_) gain_ *= l.gain;
  }

  const TransmitterProfile& profile() const { return tx_; }
  const std::vector<ReceiverLoad>& loads() const { return loads_; }
  double sample_rate() const { return sample_rate_; }
  std::size_t samples_per_word(int gap_bits) const {
    return static_cast<std::size_t>(32 + gap_bits) * static_cast<std::size_t>(opts_.samples_per_bit);
  }

  // Words back to back, each followed by gap_bits NULL bit periods.
  Trace stream(std::span<const ArincWord> words, int gap_bits, std::uint64_t seed) const {
    if (gap_bits < 4) throw InvalidArgument("inter-word gap must be at least 4 bits");
    Trace out;
    out.sample_rate = sample_rate_;
    out.bit_rate = tx_.bit_rate;
    const std::size_t per_word = samples_per_word(gap_bits);
    out.samples.assign(per_word * words.size(), 0.0);
    out.word_starts.reserve(words.size());

    Rng rng(seed);
    std::vector<detail::Edge> edges;
    std::vector<detail::Bump> bumps;
    edges.reserve(64 * words.size());
    bumps.reserve(31 * words.size());
    const double dt = 1.0 / sample_rate_;
    for (std::size_t w = 0; w < words.size(); ++w) {
      const std::size_t start = w * per_word;
      out.word_starts.push_back(start);
      const double phase = opts_.random_phase ? rng.uniform() * dt : 0.0;
      append_word(words[w], static_cast<double>(start) * dt + phase, rng, edges, bumps);
    }
    render(out.samples, edges, bumps, dt);
    if (tx_.noise_sigma > 0.0)
      for (double& v : out.samples) v += tx_.noise_sigma * rng.normal();
    return out;
  }

  Trace word(ArincWord w, std::uint64_t seed, int gap_bits = 4) const {
    return stream(std::span<const ArincWord>(&w, 1), gap_bits, seed);
  }

 private:
  void append_word(ArincWord word, double origin, Rng& rng, std::vector<detail::Edge>& edges,
                   std::vector<detail::Bump>& bumps) const {
    const auto bits = to_bits_msb_first(word);
    const double half = 0.5 * bit_period_;
    double prev_end = 0.0;
    for (int k = 0; k < 32; ++k) {
      double jitter = 0.0;
      if (tx_.timing_jitter > 0.0) jitter = std::clamp(rng.normal(), -4.0, 4.0) * tx_.timing_jitter;
      const double t0 = origin + k * bit_period_ + jitter;
      const bool one = bits[k] != 0;
      const double level = one ? tx_.hi_volts : tx_.lo_volts;
      edges.push_back({t0, level - tx_.null_volts, level, one});
      edges.push_back({t0 + half, tx_.null_volts - level, tx_.null_volts, !one});
      if (k > 0) {
        // Smile between two ones, frown between two zeros, flat otherwise.
        const double polarity = (bits[k - 1] ? 1.0 : -1.0) + (one ? 1.0 : -1.0);
        if (polarity != 0.0 && t0 > prev_end)
          bumps.push_back({prev_end, t0, -0.5 * polarity * tx_.null_shape_gain});
      }
      prev_end = t0 + half + (one ? fall_ramp_ : rise_ramp_);
    }
  }

  void render(std::vector<double>& out, const std::vector<detail::Edge>& edges,
              const std::vector<detail::Bump>& bumps, double dt) const {
    std::size_t first_live = 0;  // edges before this have fully settled
    std::size_t next_edge = 0;   // edges from here on have not started
    std::size_t bump = 0;
    double settled = tx_.null_volts;
    const double support = rise_.support();
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double t = static_cast<double>(i) * dt;
      while (next_edge < edges.size() && edges[next_edge].time <= t) {
        settled = edges[next_edge].level_after;
        ++next_edge;
      }
      while (first_live < next_edge && t - edges[first_live].time >= support) ++first_live;
      double v = settled;
      for (std::size_t e = first_live; e < next_edge; ++e) {
        const auto& edge = edges[e];
        const double tau = t - edge.time;
        v += edge.swing * (edge.rising ? rise_(tau) : fall_(tau));
      }
      while (bump < bumps.size() && bumps[bump].end <= t) ++bump;
      if (bump < bumps.size() && bumps[bump].begin <= t) {
        const auto& b = bumps[bump];
        v += b.amplitude * std::sin(std::numbers::pi * (t - b.begin) / (b.end - b.begin));
      }
      out[i] = gain_ * v;
    }
  }

  TransmitterProfile tx_;
  std::vector<ReceiverLoad> loads_;
  SynthesisOptions opts_;
  double bit_period_ = 0.0;
  double sample_rate_ = 0.0;
  double rise_ramp_ = 0.0;
  double fall_ramp_ = 0.0;
  double gain_ = 1.0;
  detail::EdgeTable rise_;
  detail::EdgeTable fall_;
};

inline Trace synthesize_word(const TransmitterProfile& tx, const std::vector<ReceiverLoad>& loads,
                             ArincWord word, std::uint64_t seed, SynthesisOptions opts = {}) {
  return WaveformSynthesizer(tx, loads, opts).word(word, seed);
}

inline Trace synthesize_stream(const TransmitterProfile& tx, const std::vector<ReceiverLoad>& loads,
                               std::span<const ArincWord> words, int gap_bits, std::uint64_t seed,
                               SynthesisOptions opts = {}) {
  if (gap_bits < 4) throw InvalidArgument("inter-word gap must be at least 4 bits");
  return WaveformSynthesizer(tx, loads, opts).stream(words, gap_bits, seed);
}

// Hamming-windowed sinc low-pass at Nyquist/factor, then keep every factor-th sample.
// The filter's group delay is compensated and edges are extended by replication.
// factor == 1 places the cutoff at Nyquist, where the ideal filter is the identity.
inline Trace decimate(const Trace& in, int factor, int taps) {
  if (factor < 1) throw InvalidArgument("decimation factor must be >= 1");
  if (taps < factor) throw InvalidArgument("taps must be >= factor");
  if (in.samples.size() < static_cast<std::size_t>(taps))
    throw InvalidArgument("trace shorter than the filter");
  if (factor == 1) return in;

  const auto h = fir::design_lowpass(taps, 1.0 / factor);
  const auto n = static_cast<std::ptrdiff_t>(in.samples.size());
  const std::ptrdiff_t delay = (taps - 1) / 2;
  Trace out;
  out.sample_rate = in.sample_rate / factor;
  out.bit_rate = in.bit_rate;
  const std::size_t out_len = (in.samples.size() + factor - 1) / factor;
  out.samples.resize(out_len);
  for (std::size_t m = 0; m < out_len; ++m) {
    const auto base = static_cast<std::ptrdiff_t>(m) * factor - delay;
    double acc = 0.0;
    for (int j = 0; j < taps; ++j) {
      const auto idx = std::clamp<std::ptrdiff_t>(base + j, 0, n - 1);
      acc += h[j] * in.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[m] = acc;
  }
  out.word_starts.reserve(in.word_starts.size());
  for (std::size_t s : in.word_starts) out.word_starts.push_back(s / factor);
  return out;
}

}  // namespace afp
