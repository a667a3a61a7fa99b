#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "afp/bus_sim.hpp"
#include "afp/detector.hpp"
#include "afp/errors.hpp"
#include "afp/markov.hpp"
#include "afp/parallel.hpp"
#include "afp/rng.hpp"
#include "afp/segmentation.hpp"
#include "afp/word_codec.hpp"

namespace afp {

enum class AttackKind { tx_switch, rx_switch, rx_addition };

inline const char* to_string(AttackKind k) {
  switch (k) {
    case AttackKind::tx_switch:
      return "tx_switch";
    case AttackKind::rx_switch:
      return "rx_switch";
    case AttackKind::rx_addition:
      return "rx_addition";
  }
  return "?";
}

inline AttackKind parse_attack_kind(const std::string& s) {
  for (AttackKind k : {AttackKind::tx_switch, AttackKind::rx_switch, AttackKind::rx_addition})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown attack kind '" + s + "'");
}

// A transmitter together with the receivers/line it drives.
struct DeviceConfig {
  TransmitterProfile tx;
  std::vector<ReceiverLoad> loads;

  friend bool operator==(const DeviceConfig&, const DeviceConfig&) = default;
};

inline constexpr int kWordsPerDevice = 4920;
inline constexpr int kMinWordsPerDevice = 500;
inline constexpr double kTrainFraction = 0.6;
inline constexpr int kWordBits = 36;

struct Scenario {
  DeviceConfig guarded;
  std::vector<DeviceConfig> rogue_variants;
  AttackKind attack_kind = AttackKind::tx_switch;
  std::vector<ArincWord> words{kReferenceWords.begin(), kReferenceWords.end()};
  int words_per_device = kWordsPerDevice;
  std::uint64_t seed = 1;
  int gap_bits = 4;
  int samples_per_bit = kDefaultSamplesPerBit;
  Thresholds thresholds;
  LofParams lof;
};

inline void validate(const Scenario& s) {
  if (s.rogue_variants.empty()) throw InvalidArgument("scenario needs at least one rogue variant");
  if (s.words.empty()) throw InvalidArgument("scenario needs at least one word value");
  if (s.words_per_device < kMinWordsPerDevice)
    throw InvalidArgument("words_per_device must be >= " + std::to_string(kMinWordsPerDevice));
  if (s.gap_bits < 4) throw InvalidArgument("gap_bits must be >= 4");
  validate(s.thresholds);
  auto check = [&](const DeviceConfig& d) {
    validate(d.tx);
    for (const auto& l : d.loads) validate(l, d.tx.bit_rate);
  };
  check(s.guarded);
  for (const auto& r : s.rogue_variants) check(r);
}

// Index in `far`/`mdr` is t_votes, 0..127.
struct ErrorCurves {
  std::vector<double> far;
  std::vector<double> mdr;
};

struct DetectionStats {
  std::size_t max_words = 0;
  double mean_words = 0.0;
  std::size_t observed = 0;
  std::size_t censored = 0;
  double max_seconds = 0.0;
  double mean_seconds = 0.0;
};

struct EvalOptions {
  int t_votes = 100;
  int reps = 1000;
  std::size_t test_words = 1968;
  std::vector<int> t_suspicion_grid = default_grid();
  double words_per_second = markov::kWordsPerSecond;

  static std::vector<int> default_grid() {
    std::vector<int> g(50);
    std::iota(g.begin(), g.end(), 1);
    return g;
  }
};

struct Report {
  FeatureSetId set_id = FeatureSetId::RAW;
  ErrorCurves curves;
  double eer = 0.0;
  double fa_per_sec = 0.0;
  std::map<int, double> counter_far;
  std::map<int, DetectionStats> detection_time;
};

// ---------------------------------------------------------------------------
// Threshold-free metrics

// FAR(t): normal words with votes <= t. MDR(t): rogue words with votes > t.
inline ErrorCurves error_curves(std::span<const int> normal_votes, std::span<const int> rogue_votes) {
  if (normal_votes.empty() || rogue_votes.empty()) throw InvalidArgument("error curves need both test sets");
  constexpr int kMax = static_cast<int>(kSegmentsPerWord);
  std::vector<double> hist_n(kMax + 1, 0.0), hist_r(kMax + 1, 0.0);
  for (int v : normal_votes) hist_n[std::clamp(v, 0, kMax)] += 1.0;
  for (int v : rogue_votes) hist_r[std::clamp(v, 0, kMax)] += 1.0;
  ErrorCurves c;
  c.far.resize(kMax + 1);
  c.mdr.resize(kMax + 1);
  double below_n = 0.0, below_r = 0.0;
  const auto nn = static_cast<double>(normal_votes.size());
  const auto nr = static_cast<double>(rogue_votes.size());
  for (int t = 0; t <= kMax; ++t) {
    below_n += hist_n[t];
    below_r += hist_r[t];
    c.far[t] = below_n / nn;
    c.mdr[t] = (nr - below_r) / nr;
  }
  return c;
}

// Where FAR - MDR changes sign, both curves are linearly interpolated between
// the adjacent thresholds; a threshold with FAR == MDR gives that value directly.
inline double compute_eer(const ErrorCurves& c) {
  const std::size_t n = c.far.size();
  if (n == 0 || c.mdr.size() != n) throw InvalidArgument("malformed error curves");
  const double d0 = c.far[0] - c.mdr[0];
  if (d0 >= 0.0) return d0 == 0.0 ? c.far[0] : 0.5 * (c.far[0] + c.mdr[0]);
  for (std::size_t t = 1; t < n; ++t) {
    const double d = c.far[t] - c.mdr[t];
    if (d == 0.0) return c.far[t];
    if (d > 0.0) {
      const double prev = c.far[t - 1] - c.mdr[t - 1];
      const double a = -prev / (d - prev);
      return c.far[t - 1] + a * (c.far[t] - c.far[t - 1]);
    }
  }
  return 0.5 * (c.far[n - 1] + c.mdr[n - 1]);
}

// False alarms per second at the EER, each word occupying word_bits bit times.
inline double fa_per_sec(double eer, double bit_rate = kDefaultBitRate, int word_bits = kWordBits) {
  if (!(eer >= 0.0 && eer <= 1.0)) throw InvalidArgument("EER must be in [0, 1]");
  return eer * bit_rate / word_bits;
}

// ---------------------------------------------------------------------------
// Counter protocols over a fixed label sequence, each rep starting at a
// uniformly random cyclic shift.

inline std::vector<std::size_t> cyclic_shifts(std::size_t length, int reps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> shifts(static_cast<std::size_t>(reps));
  for (auto& s : shifts) s = static_cast<std::size_t>(rng.uniform_index(length));
  return shifts;
}

inline std::map<int, double> counter_far_from_labels(const std::vector<Label>& labels,
                                                     const std::vector<int>& grid, int reps,
                                                     std::uint64_t seed) {
  if (labels.empty()) throw InvalidArgument("counter FAR needs a non-empty test stream");
  const auto shifts = cyclic_shifts(labels.size(), reps, seed);
  const std::size_t m = labels.size();
  std::map<int, double> out;
  for (int t : grid) {
    std::size_t alarms = 0;
    for (std::size_t s : shifts) {
      SuspicionCounter c(t);
      if (run_labels(c, m, [&](std::size_t i) { return labels[(s + i) % m]; })) ++alarms;
    }
    out[t] = static_cast<double>(alarms) / static_cast<double>(reps);
  }
  return out;
}

// Words until alarm for every (stream, rep); reps that never alarm are censored.
inline std::map<int, DetectionStats> detection_times_from_labels(
    const std::vector<std::vector<Label>>& streams, const std::vector<int>& grid, int reps,
    std::uint64_t seed, double words_per_second = markov::kWordsPerSecond) {
  std::map<int, DetectionStats> out;
  std::vector<std::vector<std::size_t>> shifts;
  for (std::size_t v = 0; v < streams.size(); ++v) {
    if (streams[v].empty()) throw InvalidArgument("detection time needs non-empty streams");
    shifts.push_back(cyclic_shifts(streams[v].size(), reps, derive_seed(seed, {v})));
  }
  for (int t : grid) {
    DetectionStats st;
    double sum = 0.0;
    for (std::size_t v = 0; v < streams.size(); ++v) {
      const auto& labels = streams[v];
      const std::size_t m = labels.size();
      for (std::size_t s : shifts[v]) {
        SuspicionCounter c(t);
        auto hit = run_labels(c, m, [&](std::size_t i) { return labels[(s + i) % m]; });
        if (!hit) {
          ++st.censored;
          continue;
        }
        ++st.observed;
        sum += static_cast<double>(*hit);
        st.max_words = std::max(st.max_words, *hit);
      }
    }
    st.mean_words = st.observed ? sum / static_cast<double>(st.observed) : 0.0;
    st.max_seconds = static_cast<double>(st.max_words) / words_per_second;
    st.mean_seconds = st.mean_words / words_per_second;
    out[t] = st;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic experiments

// Synthesizes and segments words [first, first+count) of one device. A word the
// segmenter rejects yields an empty segment list, which votes as an anomaly.
inline std::vector<WordSegments> device_words(const Scenario& sc, const DeviceConfig& dev,
                                              std::uint64_t device_id,
                                              const std::vector<std::size_t>& indices) {
  SynthesisOptions opts;
  opts.samples_per_bit = sc.samples_per_bit;
  const WaveformSynthesizer synth(dev.tx, dev.loads, opts);
  std::vector<WordSegments> out(indices.size());
  parallel_for(indices.size(), [&](std::size_t i) {
    const std::size_t w = indices[i];
    const Trace t = synth.word(sc.words[w % sc.words.size()], derive_seed(sc.seed, {device_id, w}), sc.gap_bits);
    try {
      out[i] = segment_word(t, t.word_starts.front(), sc.thresholds);
    } catch (const MalformedSignal&) {
      out[i].clear();
    }
  });
  return out;
}

inline FeatureOptions feature_options_for(const Scenario& sc) {
  FeatureOptions f;
  f.sample_interval = 1.0 / (sc.guarded.tx.bit_rate * sc.samples_per_bit);
  return f;
}

// Normal-vote counts for rogue devices are computed in chunks so that large
// test sets never need all segments in memory at once.
inline std::vector<int> device_votes(const Scenario& sc, const WordDetector& det, const DeviceConfig& dev,
                                     std::uint64_t device_id, const std::vector<std::size_t>& indices) {
  constexpr std::size_t kChunk = 2048;
  std::vector<int> votes;
  votes.reserve(indices.size());
  for (std::size_t lo = 0; lo < indices.size(); lo += kChunk) {
    const std::vector<std::size_t> part(indices.begin() + static_cast<std::ptrdiff_t>(lo),
                                        indices.begin() + static_cast<std::ptrdiff_t>(std::min(indices.size(), lo + kChunk)));
    const auto words = device_words(sc, dev, device_id, part);
    for (const auto& v : classify_words(det, words)) votes.push_back(v.normal_votes);
  }
  return votes;
}

inline std::vector<Label> labels_at(const std::vector<int>& votes, int t_votes) {
  std::vector<Label> out(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) out[i] = votes[i] <= t_votes ? Label::anomaly : Label::normal;
  return out;
}

// Guarded detector plus per-word vote counts on the held-out normal words and
// on every rogue variant. All protocols below are derived from these counts.
struct Experiment {
  WordDetector detector;
  std::vector<int> normal_votes;
  std::vector<std::vector<int>> rogue_votes;
  std::size_t malformed_training_words = 0;
};

inline std::size_t training_count(std::size_t words_per_device) {
  return static_cast<std::size_t>(std::llround(kTrainFraction * static_cast<double>(words_per_device)));
}

inline Experiment run_experiment(const Scenario& sc, FeatureSetId set_id, int t_votes = 100) {
  validate(sc);
  const auto n = static_cast<std::size_t>(sc.words_per_device);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(sc.seed, {0x5EED5u}));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
  const auto n_train = training_count(n);
  const std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  Experiment ex;
  {
    auto train = device_words(sc, sc.guarded, 0, train_idx);
    const auto before = train.size();
    std::erase_if(train, [](const WordSegments& w) { return w.empty(); });
    ex.malformed_training_words = before - train.size();
    ex.detector = train_detector(train, set_id, t_votes, sc.lof, feature_options_for(sc));
  }
  ex.normal_votes = device_votes(sc, ex.detector, sc.guarded, 0, test_idx);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t v = 0; v < sc.rogue_variants.size(); ++v)
    ex.rogue_votes.push_back(device_votes(sc, ex.detector, sc.rogue_variants[v], v + 1, all));
  return ex;
}

inline ErrorCurves curves_of(const Experiment& ex) {
  std::vector<int> rogue;
  for (const auto& v : ex.rogue_votes) rogue.insert(rogue.end(), v.begin(), v.end());
  return error_curves(ex.normal_votes, rogue);
}

inline std::map<int, double> counter_far_of(const Experiment& ex, const Scenario& sc, const EvalOptions& o) {
  if (ex.normal_votes.size() < o.test_words)
    throw InvalidArgument("held-out normal set has " + std::to_string(ex.normal_votes.size()) +
                          " words, fewer than test_words=" + std::to_string(o.test_words));
  const std::vector<int> votes(ex.normal_votes.begin(), ex.normal_votes.begin() + static_cast<std::ptrdiff_t>(o.test_words));
  return counter_far_from_labels(labels_at(votes, o.t_votes), o.t_suspicion_grid, o.reps,
                                 derive_seed(sc.seed, {0xFA4u}));
}

inline std::map<int, DetectionStats> detection_time_of(const Experiment& ex, const Scenario& sc,
                                                       const EvalOptions& o) {
  std::vector<std::vector<Label>> streams;
  for (const auto& votes : ex.rogue_votes) {
    const std::size_t m = std::min(votes.size(), o.test_words);
    streams.push_back(labels_at(std::vector<int>(votes.begin(), votes.begin() + static_cast<std::ptrdiff_t>(m)), o.t_votes));
  }
  return detection_times_from_labels(streams, o.t_suspicion_grid, o.reps, derive_seed(sc.seed, {0xDE7u}),
                                     o.words_per_second);
}

inline ErrorCurves run_single_word_eval(const Scenario& sc, FeatureSetId set_id) {
  return curves_of(run_experiment(sc, set_id));
}

inline std::map<int, double> run_counter_far(const Scenario& sc, FeatureSetId set_id, EvalOptions o = {}) {
  return counter_far_of(run_experiment(sc, set_id, o.t_votes), sc, o);
}

inline std::map<int, DetectionStats> run_detection_time(const Scenario& sc, FeatureSetId set_id,
                                                        EvalOptions o = {}) {
  return detection_time_of(run_experiment(sc, set_id, o.t_votes), sc, o);
}

inline Report make_report(const Experiment& ex, const Scenario& sc, const EvalOptions& o) {
  Report r;
  r.set_id = ex.detector.set_id;
  r.curves = curves_of(ex);
  r.eer = compute_eer(r.curves);
  r.fa_per_sec = fa_per_sec(r.eer, sc.guarded.tx.bit_rate, kWordBits);
  r.counter_far = counter_far_of(ex, sc, o);
  r.detection_time = detection_time_of(ex, sc, o);
  return r;
}

inline Report evaluate(const Scenario& sc, FeatureSetId set_id, const EvalOptions& o = {}) {
  return make_report(run_experiment(sc, set_id, o.t_votes), sc, o);
}

// ---------------------------------------------------------------------------
// Synthetic device populations. Devices of one model share nominal values and
// differ by small manufacturing spreads; another vendor uses other nominals.

// Each analog parameter multiplied by (1 + U[-spread, spread]).
inline TransmitterProfile draw_device(const TransmitterProfile& nominal, double spread, Rng& rng) {
  auto jiggle = [&](double v) { return v * (1.0 + rng.uniform(-spread, spread)); };
  TransmitterProfile p = nominal;
  p.hi_volts = jiggle(nominal.hi_volts);
  p.lo_volts = jiggle(nominal.lo_volts);
  p.rise_time = jiggle(nominal.rise_time);
  p.fall_time = jiggle(nominal.fall_time);
  p.overshoot_frac = jiggle(nominal.overshoot_frac);
  p.ringing_freq = jiggle(nominal.ringing_freq);
  p.ringing_damping = jiggle(nominal.ringing_damping);
  p.null_shape_gain = jiggle(nominal.null_shape_gain);
  return p;
}

inline TransmitterProfile vendor_a_nominal() { return TransmitterProfile{}; }

inline TransmitterProfile vendor_b_nominal() {
  TransmitterProfile p;
  p.hi_volts = 10.4;
  p.lo_volts = -10.35;
  p.rise_time = 1.65e-6;
  p.fall_time = 1.6e-6;
  p.overshoot_frac = 0.07;
  p.ringing_freq = 1.1e6;
  p.ringing_damping = 0.45;
  p.null_shape_gain = 0.18;
  return p;
}

inline ReceiverLoad primary_receiver() { return {4e6, 0.995}; }
// A different receiver on a different stretch of line.
inline ReceiverLoad alternate_receiver() { return {3.3e6, 0.988}; }
// A short stub with one more receiver on it.
inline ReceiverLoad added_receiver() { return {25e6, 0.999}; }

// Guarded vendor-A transmitter against several vendor-B transmitters.
inline Scenario tx_switch_scenario(std::uint64_t seed, int rogues = 4) {
  Scenario sc;
  sc.seed = seed;
  sc.attack_kind = AttackKind::tx_switch;
  Rng rng(derive_seed(seed, {0xA11u}));
  sc.guarded = {draw_device(vendor_a_nominal(), 0.005, rng), {primary_receiver()}};
  for (int i = 0; i < rogues; ++i)
    sc.rogue_variants.push_back({draw_device(vendor_b_nominal(), 0.01, rng), {primary_receiver()}});
  return sc;
}

// Same transmitter; the receiver and its line are replaced.
inline Scenario rx_switch_scenario(std::uint64_t seed) {
  Scenario sc;
  sc.seed = seed;
  sc.attack_kind = AttackKind::rx_switch;
  Rng rng(derive_seed(seed, {0xB22u}));
  const auto tx = draw_device(vendor_a_nominal(), 0.005, rng);
  sc.guarded = {tx, {primary_receiver()}};
  sc.rogue_variants.push_back({tx, {alternate_receiver()}});
  return sc;
}

// Same transmitter and receiver, plus one extra receiver on the bus.
inline Scenario rx_addition_scenario(std::uint64_t seed) {
  Scenario sc;
  sc.seed = seed;
  sc.attack_kind = AttackKind::rx_addition;
  Rng rng(derive_seed(seed, {0xC33u}));
  const auto tx = draw_device(vendor_a_nominal(), 0.005, rng);
  sc.guarded = {tx, {primary_receiver()}};
  sc.rogue_variants.push_back({tx, {primary_receiver(), added_receiver()}});
  return sc;
}

}  // namespace afp
