#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afp/errors.hpp"
#include "afp/segmentation.hpp"

namespace afp {

enum class FeatureSetId : int { RAW = 0, GENERIC, POLYNOMIAL, HANDCRAFTED };

inline constexpr std::array<FeatureSetId, 4> kAllFeatureSets{
    FeatureSetId::RAW, FeatureSetId::GENERIC, FeatureSetId::POLYNOMIAL, FeatureSetId::HANDCRAFTED};

constexpr std::string_view to_string(FeatureSetId id) {
  constexpr std::array<std::string_view, 4> names{"raw", "generic", "polynomial", "handcrafted"};
  return names[static_cast<std::size_t>(id)];
}

inline FeatureSetId parse_feature_set(std::string_view s) {
  for (FeatureSetId id : kAllFeatureSets)
    if (to_string(id) == s) return id;
  throw ConfigError("unknown feature set '" + std::string(s) + "'");
}

struct FeatureVector {
  SegmentType seg_type = SegmentType::HI;
  FeatureSetId set_id = FeatureSetId::RAW;
  std::vector<double> values;
};

// Per segment type, indexed by index_of(SegmentType).
struct FeatureOptions {
  std::array<std::size_t, kSegmentTypeCount> raw_lengths{20, 20, 17, 17, 17, 17, 4, 4, 4, 4};
  std::array<int, kSegmentTypeCount> poly_degrees{7, 7, 6, 7, 6, 7, 2, 2, 2, 2};
  double sample_interval = 1.0 / (kDefaultBitRate * kDefaultSamplesPerBit);

  friend bool operator==(const FeatureOptions&, const FeatureOptions&) = default;
};

constexpr bool participates(FeatureSetId set, SegmentType t) {
  return set != FeatureSetId::HANDCRAFTED ||
         (t != SegmentType::NULL_HL && t != SegmentType::NULL_LH);
}

inline constexpr std::size_t kGenericFeatureCount = 8;

inline std::size_t handcrafted_feature_count(SegmentType t) {
  switch (t) {
    case SegmentType::HI:
    case SegmentType::LO:
      return 10;
    case SegmentType::NULL_HL:
    case SegmentType::NULL_LH:
      return 0;
    default:
      return 2;
  }
}

inline std::size_t feature_count(FeatureSetId set, SegmentType t, const FeatureOptions& opts = {}) {
  switch (set) {
    case FeatureSetId::RAW:
      return opts.raw_lengths[index_of(t)];
    case FeatureSetId::GENERIC:
      return kGenericFeatureCount;
    case FeatureSetId::POLYNOMIAL:
      return static_cast<std::size_t>(opts.poly_degrees[index_of(t)]) + 2;
    case FeatureSetId::HANDCRAFTED:
      return handcrafted_feature_count(t);
  }
  return 0;
}

inline FeatureVector extract_raw(const Segment& seg, std::size_t target_len) {
  if (seg.samples.size() < target_len) throw SegmentTooShort(seg.samples.size(), target_len);
  return {seg.seg_type, FeatureSetId::RAW,
          std::vector<double>(seg.samples.begin(),
                              seg.samples.begin() + static_cast<std::ptrdiff_t>(target_len))};
}

inline FeatureVector extract_raw(const Segment& seg, const FeatureOptions& opts = {}) {
  return extract_raw(seg, opts.raw_lengths[index_of(seg.seg_type)]);
}

// mean, std, variance, skewness, kurtosis, rms, max, energy; population moments.
// A constant segment has zero skewness and kurtosis.
inline FeatureVector extract_generic(const Segment& seg) {
  const auto& x = seg.samples;
  if (x.size() < 2) throw SegmentTooShort(x.size(), 2);
  const double n = static_cast<double>(x.size());
  double sum = 0.0, sum_sq = 0.0, mx = x.front();
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
    mx = std::max(mx, v);
  }
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double sd = std::sqrt(m2);
  const double skew = sd > 0.0 ? m3 / (m2 * sd) : 0.0;
  const double kurt = sd > 0.0 ? m4 / (m2 * m2) : 0.0;
  const double energy = sum_sq / n;
  return {seg.seg_type, FeatureSetId::GENERIC, {mean, sd, m2, skew, kurt, std::sqrt(energy), mx, energy}};
}

namespace detail {

// Least-squares coefficients of a polynomial in ascending powers of t, via
// Householder QR of the Vandermonde matrix.
inline std::vector<double> polyfit(std::span<const double> t, std::span<const double> y, int degree) {
  const std::size_t m = y.size();
  const auto n = static_cast<std::size_t>(degree) + 1;
  std::vector<double> a(m * n);  // column-major
  for (std::size_t i = 0; i < m; ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      a[j * m + i] = p;
      p *= t[i];
    }
  }
  std::vector<double> b(y.begin(), y.end());
  std::vector<double> diag(n);
  for (std::size_t k = 0; k < n; ++k) {
    double* col = &a[k * m];
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    if (norm == 0.0) throw InvalidArgument("rank-deficient polynomial fit");
    const double alpha = col[k] > 0.0 ? -norm : norm;
    col[k] -= alpha;  // v = x - alpha e1, stored in place
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += col[i] * col[i];
    diag[k] = alpha;
    auto reflect = [&](double* target) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += col[i] * target[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < m; ++i) target[i] -= f * col[i];
    };
    for (std::size_t j = k + 1; j < n; ++j) reflect(&a[j * m]);
    reflect(b.data());
  }
  std::vector<double> c(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[k];
    for (std::size_t j = k + 1; j < n; ++j) acc -= a[j * m + k] * c[j];
    c[k] = acc / diag[k];
  }
  return c;
}

}  // namespace detail

// Coefficients (ascending powers of time normalized to [0, 1]) followed by the
// sum of squared fit errors.
inline FeatureVector extract_polynomial(const Segment& seg, int degree) {
  const auto& y = seg.samples;
  if (degree < 0) throw InvalidArgument("polynomial degree must be non-negative");
  const auto need = static_cast<std::size_t>(degree) + 1;
  if (y.size() < need || y.size() < 2) throw SegmentTooShort(y.size(), std::max<std::size_t>(need, 2));
  const std::size_t m = y.size();
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) t[i] = static_cast<double>(i) / static_cast<double>(m - 1);
  auto coef = detail::polyfit(t, y, degree);
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double p = 0.0;
    for (std::size_t j = coef.size(); j-- > 0;) p = p * t[i] + coef[j];
    sse += (y[i] - p) * (y[i] - p);
  }
  coef.push_back(sse);
  return {seg.seg_type, FeatureSetId::POLYNOMIAL, std::move(coef)};
}

inline FeatureVector extract_polynomial(const Segment& seg, const FeatureOptions& opts = {}) {
  return extract_polynomial(seg, opts.poly_degrees[index_of(seg.seg_type)]);
}

namespace detail {

// First interior local extremum whose index is > `after` (or any, if after < 0).
// Runs of equal samples count as one point located at their first index.
inline std::optional<std::size_t> first_extremum(std::span<const double> x, std::ptrdiff_t after,
                                                 bool maximum) {
  const std::size_t n = x.size();
  std::size_t run_begin = 0;
  while (run_begin < n) {
    std::size_t run_end = run_begin + 1;
    while (run_end < n && x[run_end] == x[run_begin]) ++run_end;
    if (run_begin > 0 && run_end < n && static_cast<std::ptrdiff_t>(run_begin) > after) {
      const double v = x[run_begin];
      const double before = x[run_begin - 1];
      const double next = x[run_end];
      const bool hit = maximum ? (v > before && v > next) : (v < before && v < next);
      if (hit) return run_begin;
    }
    run_begin = run_end;
  }
  return std::nullopt;
}

inline std::size_t global_extremum(std::span<const double> x, bool maximum) {
  auto it = maximum ? std::max_element(x.begin(), x.end()) : std::min_element(x.begin(), x.end());
  return static_cast<std::size_t>(it - x.begin());
}

}  // namespace detail

// Per-type shape descriptors; times are in seconds from the segment start.
//   HI:  first local max (overshoot), the next local min, the next local max,
//        then (t2-t1, v2-v1, t3-t1, v3-v1). LO mirrors this.
//   NULL_HH / NULL_LL: time and value of the first undershoot / overshoot.
//   transitions: mean slope per second, mean deviation from the endpoint chord.
// A missing extremum falls back to the global extremum for point 1; any later
// point that cannot be found repeats point 1.
inline FeatureVector extract_handcrafted(const Segment& seg, double sample_interval) {
  const auto& x = seg.samples;
  const SegmentType type = seg.seg_type;
  if (!participates(FeatureSetId::HANDCRAFTED, type))
    throw ExcludedSegmentType(std::string(to_string(type)) + " has no hand-crafted features");
  if (x.size() < 2) throw SegmentTooShort(x.size(), 2);
  const double dt = sample_interval;
  FeatureVector out{type, FeatureSetId::HANDCRAFTED, {}};

  if (type == SegmentType::HI || type == SegmentType::LO) {
    const bool up = type == SegmentType::HI;
    auto p1 = detail::first_extremum(x, -1, up);
    std::size_t i1 = p1 ? *p1 : detail::global_extremum(x, up);
    std::size_t i2 = i1, i3 = i1;
    if (p1) {
      if (auto p2 = detail::first_extremum(x, static_cast<std::ptrdiff_t>(i1), !up)) {
        i2 = *p2;
        if (auto p3 = detail::first_extremum(x, static_cast<std::ptrdiff_t>(i2), up)) i3 = *p3;
      }
    }
    const double t1 = static_cast<double>(i1) * dt, t2 = static_cast<double>(i2) * dt,
                 t3 = static_cast<double>(i3) * dt;
    out.values = {t1, x[i1], t2, x[i2], t3, x[i3], t2 - t1, x[i2] - x[i1], t3 - t1, x[i3] - x[i1]};
  } else if (type == SegmentType::NULL_HH || type == SegmentType::NULL_LL) {
    const bool up = type == SegmentType::NULL_LL;
    auto p1 = detail::first_extremum(x, -1, up);
    const std::size_t i1 = p1 ? *p1 : detail::global_extremum(x, up);
    out.values = {static_cast<double>(i1) * dt, x[i1]};
  } else {
    const std::size_t n = x.size();
    const double span = static_cast<double>(n - 1);
    const double slope = (x.back() - x.front()) / (span * dt);
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      dev += x[i] - (x.front() + (x.back() - x.front()) * static_cast<double>(i) / span);
    out.values = {slope, dev / static_cast<double>(n)};
  }
  return out;
}

// Dispatch by feature set. Returns no vector for segment types that do not
// participate in the set.
inline std::optional<FeatureVector> extract(FeatureSetId set, const Segment& seg,
                                            const FeatureOptions& opts = {}) {
  switch (set) {
    case FeatureSetId::RAW:
      return extract_raw(seg, opts);
    case FeatureSetId::GENERIC:
      return extract_generic(seg);
    case FeatureSetId::POLYNOMIAL:
      return extract_polynomial(seg, opts);
    case FeatureSetId::HANDCRAFTED:
      if (!participates(set, seg.seg_type)) return std::nullopt;
      return extract_handcrafted(seg, opts.sample_interval);
  }
  return std::nullopt;
}

}  // namespace afp
