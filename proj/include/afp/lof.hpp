#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afp/errors.hpp"

namespace afp {

enum class Label { normal, anomaly };

inline const char* to_string(Label l) { return l == Label::normal ? "normal" : "anomaly"; }

struct LofParams {
  int k = 20;
  double contamination = 0.10;
};

// Per-dimension affine map to zero mean and unit (population) variance.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  void apply(std::span<const double> x, double* out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
  }
};

// Local Outlier Factor novelty detector. Immutable after lof_fit.
struct LofModel {
  std::size_t dim = 0;
  std::size_t count = 0;
  LofParams params;
  Standardizer scaler;
  std::vector<double> points;        // training points as given, row-major
  std::vector<double> standardized;  // same points after scaler, row-major
  std::vector<double> kdist;
  std::vector<double> lrd;
  std::vector<double> train_scores;
  double threshold = 1.0;
  // Search index: standardized rows sorted by projection on the principal axis.
  std::vector<double> axis;
  std::vector<std::size_t> order;
  std::vector<double> sorted_proj;
  std::vector<double> sorted_rows;

  std::span<const double> row(std::size_t i) const { return {&standardized[i * dim], dim}; }
};

// Local reachability density used when every reachability distance is zero
// (duplicates). Applied identically at fit and query time, so ratios collapse to 1.
inline constexpr double kDuplicateLrd = 1e10;

namespace detail {

struct Neighbor {
  double dist2;
  std::size_t index;
};

inline double squared_distance(const double* r, const double* q, std::size_t d, double bound) {
  double acc = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= d; j += 4) {
    const double a0 = r[j] - q[j], a1 = r[j + 1] - q[j + 1], a2 = r[j + 2] - q[j + 2], a3 = r[j + 3] - q[j + 3];
    acc += a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3;
    if (acc > bound) return acc;
  }
  for (; j < d; ++j) {
    const double a = r[j] - q[j];
    acc += a * a;
  }
  return acc;
}

inline double project(const std::vector<double>& axis, const double* x) {
  double s = 0.0;
  for (std::size_t j = 0; j < axis.size(); ++j) s += axis[j] * x[j];
  return s;
}

// k-distance neighborhood of standardized q among the training rows, skipping
// row `exclude`. Every row whose distance equals the k-distance is included.
// Scans outward from q's projection; a row whose projection gap alone exceeds
// the current k-th distance cannot be a neighbor. Returns kdist^2.
inline double k_neighborhood(const LofModel& m, const double* q, std::size_t k, std::size_t exclude,
                             std::vector<Neighbor>& out) {
  out.clear();
  const std::size_t n = m.count, d = m.dim;
  std::priority_queue<double> best;  // k smallest distances so far
  double bound = std::numeric_limits<double>::infinity();
  auto visit = [&](std::size_t pos) {
    const std::size_t i = m.order[pos];
    if (i == exclude) return;
    const double acc = squared_distance(&m.sorted_rows[pos * d], q, d, bound);
    if (acc > bound) return;
    out.push_back({acc, i});
    if (best.size() < k) {
      best.push(acc);
      if (best.size() == k) bound = best.top();
    } else if (acc < best.top()) {
      best.pop();
      best.push(acc);
      bound = best.top();
    }
  };
  // Slack absorbs rounding in the projections.
  auto beyond = [&](double gap) { return gap > 0.0 && gap * gap > bound * (1.0 + 1e-9) + 1e-12; };

  const double pq = project(m.axis, q);
  std::size_t hi = static_cast<std::size_t>(std::lower_bound(m.sorted_proj.begin(), m.sorted_proj.end(), pq) -
                                            m.sorted_proj.begin());
  std::size_t lo = hi;  // next candidate below is lo - 1
  bool up = hi < n, down = lo > 0;
  while (up || down) {
    if (up) {
      if (beyond(m.sorted_proj[hi] - pq)) {
        up = false;
      } else {
        visit(hi);
        up = ++hi < n;
      }
    }
    if (down) {
      if (beyond(pq - m.sorted_proj[lo - 1])) {
        down = false;
      } else {
        visit(--lo);
        down = lo > 0;
      }
    }
  }
  const double kd2 = best.top();
  std::erase_if(out, [kd2](const Neighbor& nb) { return nb.dist2 > kd2; });
  return kd2;
}

// Leading eigenvector of the covariance of the standardized rows, by power iteration.
inline std::vector<double> principal_axis(const std::vector<double>& rows, std::size_t n, std::size_t d) {
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = &rows[i * d];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov[a * d + b] += r[a] * r[b];
  }
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d))), w(d);
  for (int it = 0; it < 100; ++it) {
    for (std::size_t a = 0; a < d; ++a) {
      w[a] = 0.0;
      for (std::size_t b = 0; b < d; ++b) w[a] += cov[a * d + b] * v[b];
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;
    for (std::size_t a = 0; a < d; ++a) v[a] = w[a] / norm;
  }
  return v;
}

inline void build_index(LofModel& m) {
  const std::size_t n = m.count, d = m.dim;
  m.axis = principal_axis(m.standardized, n, d);
  std::vector<double> proj(n);
  for (std::size_t i = 0; i < n; ++i) proj[i] = project(m.axis, &m.standardized[i * d]);
  m.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.order[i] = i;
  std::stable_sort(m.order.begin(), m.order.end(), [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });
  m.sorted_proj.resize(n);
  m.sorted_rows.resize(n * d);
  for (std::size_t pos = 0; pos < n; ++pos) {
    m.sorted_proj[pos] = proj[m.order[pos]];
    std::copy_n(&m.standardized[m.order[pos] * d], d, &m.sorted_rows[pos * d]);
  }
}

inline double local_reachability_density(const LofModel& m, const std::vector<Neighbor>& hood) {
  double sum = 0.0;
  for (const auto& nb : hood) sum += std::max(m.kdist[nb.index], std::sqrt(nb.dist2));
  const double mean = sum / static_cast<double>(hood.size());
  return mean > 0.0 ? 1.0 / mean : kDuplicateLrd;
}

inline double neighbor_lrd_mean(const LofModel& m, const std::vector<Neighbor>& hood) {
  double sum = 0.0;
  for (const auto& nb : hood) sum += m.lrd[nb.index];
  return sum / static_cast<double>(hood.size());
}

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

inline Standardizer fit_standardizer(const std::vector<std::vector<double>>& points) {
  const std::size_t d = points.front().size();
  const double n = static_cast<double>(points.size());
  Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += p[j];
  for (double& m : s.mean) m /= n;
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j) s.scale[j] += (p[j] - s.mean[j]) * (p[j] - s.mean[j]);
  for (double& v : s.scale) {
    v = std::sqrt(v / n);
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

// Builds a model from fully populated fields `points`, `dim`, `count`, `params`
// and `scaler`; fills in everything derived from them.
inline void lof_build(LofModel& m) {
  const std::size_t n = m.count, d = m.dim;
  const auto k = static_cast<std::size_t>(m.params.k);
  m.standardized.resize(n * d);
  for (std::size_t i = 0; i < n; ++i)
    m.scaler.apply(std::span<const double>(&m.points[i * d], d), &m.standardized[i * d]);

  detail::build_index(m);

  std::vector<std::vector<detail::Neighbor>> hoods(n);
  m.kdist.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    m.kdist[i] = std::sqrt(detail::k_neighborhood(m, &m.standardized[i * d], k, i, hoods[i]));
  m.lrd.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m.lrd[i] = detail::local_reachability_density(m, hoods[i]);
  m.train_scores.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m.train_scores[i] = detail::neighbor_lrd_mean(m, hoods[i]) / m.lrd[i];
  m.threshold = detail::quantile(m.train_scores, 1.0 - m.params.contamination);
}

inline LofModel lof_fit(const std::vector<std::vector<double>>& points, LofParams params = {}) {
  if (params.k < 1) throw InvalidArgument("LOF k must be positive");
  if (!(params.contamination >= 0.0 && params.contamination < 1.0))
    throw InvalidArgument("contamination must be in [0, 1)");
  if (points.size() < static_cast<std::size_t>(params.k) + 2)
    throw InvalidArgument("LOF needs at least k+2 training points, got " + std::to_string(points.size()));
  const std::size_t d = points.front().size();
  if (d == 0) throw InvalidArgument("LOF points must have at least one dimension");
  for (const auto& p : points) {
    if (p.size() != d) throw InvalidArgument("LOF training points differ in dimension");
    for (double v : p)
      if (!std::isfinite(v)) throw InvalidArgument("LOF training point is not finite");
  }

  LofModel m;
  m.dim = d;
  m.count = points.size();
  m.params = params;
  m.scaler = fit_standardizer(points);
  m.points.reserve(m.count * d);
  for (const auto& p : points) m.points.insert(m.points.end(), p.begin(), p.end());
  lof_build(m);
  return m;
}

// Novelty score: neighbors of x come from the training points only.
inline double lof_score(const LofModel& m, std::span<const double> x) {
  if (x.size() != m.dim)
    throw InvalidArgument("LOF query has dimension " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(m.dim));
  thread_local std::vector<double> q;
  thread_local std::vector<detail::Neighbor> hood;
  q.resize(m.dim);
  m.scaler.apply(x, q.data());
  detail::k_neighborhood(m, q.data(), static_cast<std::size_t>(m.params.k), m.count, hood);
  const double lrd_x = detail::local_reachability_density(m, hood);
  return detail::neighbor_lrd_mean(m, hood) / lrd_x;
}

inline Label lof_classify(const LofModel& m, std::span<const double> x) {
  return lof_score(m, x) > m.threshold ? Label::anomaly : Label::normal;
}

}  // namespace afp
