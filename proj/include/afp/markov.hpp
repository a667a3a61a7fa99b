#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "afp/errors.hpp"

namespace afp::markov {

inline constexpr double kFlightSeconds = 36000.0;
inline constexpr double kWordsPerSecond = 610.0;
inline constexpr double kDetectionTarget = 0.99999;

// Dense row-major square matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    const std::size_t n = x.n_;
    Matrix z(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double xik = x(i, k);
        if (xik == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) z(i, j) += xik * y(k, j);
      }
    return z;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline std::vector<double> row_times(const std::vector<double>& x, const Matrix& m) {
  const std::size_t n = m.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (x[k] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) y[j] += x[k] * m(k, j);
  }
  return y;
}

// Suspicion counter as a Markov chain over counter values 0..T; state T absorbs.
struct MarkovChain {
  double p = 0.0;
  int t_suspicion = 1;
  Matrix transition;
};

inline MarkovChain build_chain(double p, int t_suspicion) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("anomaly probability must be in [0, 1]");
  if (t_suspicion < 1) throw InvalidArgument("t_suspicion must be >= 1");
  const auto n = static_cast<std::size_t>(t_suspicion) + 1;
  MarkovChain c{p, t_suspicion, Matrix(n)};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c.transition(i, i == 0 ? 0 : i - 1) += 1.0 - p;
    c.transition(i, i + 1) += p;
  }
  c.transition(n - 1, n - 1) = 1.0;
  return c;
}

inline Matrix matrix_power(const Matrix& m, std::uint64_t n) {
  Matrix result = Matrix::identity(m.size());
  Matrix base = m;
  while (n > 0) {
    if (n & 1u) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

// Probability that the counter, started at 0, has reached T within n words.
inline double alarm_probability(double p, int t_suspicion, std::uint64_t n) {
  const auto chain = build_chain(p, t_suspicion);
  return matrix_power(chain.transition, n)(0, static_cast<std::size_t>(t_suspicion));
}

struct DetectionTime {
  std::optional<std::uint64_t> words;  // empty when the target is unreachable

  std::optional<double> seconds(double words_per_second = kWordsPerSecond) const {
    if (!words) return std::nullopt;
    return static_cast<double>(*words) / words_per_second;
  }
};

// Smallest n with alarm_probability(p, T, n) >= target, by doubling then binary
// lifting over the cached powers P^(2^j).
inline DetectionTime time_to_detect(double p, int t_suspicion, double target = kDetectionTarget) {
  const auto chain = build_chain(p, t_suspicion);
  const auto last = static_cast<std::size_t>(t_suspicion);
  if (target <= 0.0) return {0};
  if (target > 1.0 || p == 0.0) return {};

  std::vector<Matrix> powers{chain.transition};
  while (powers.back()(0, last) < target) {
    if (powers.size() >= 63) return {};
    powers.push_back(powers.back() * powers.back());
  }
  std::vector<double> x(last + 1, 0.0);
  x[0] = 1.0;
  std::uint64_t n = 0;
  for (std::size_t j = powers.size() - 1; j-- > 0;) {
    auto y = row_times(x, powers[j]);
    if (y[last] < target) {
      x = std::move(y);
      n += std::uint64_t{1} << j;
    }
  }
  return {n + 1};
}

inline std::uint64_t flight_words(double duration_s = kFlightSeconds, double words_per_s = kWordsPerSecond) {
  return static_cast<std::uint64_t>(std::llround(duration_s * words_per_s));
}

inline double flight_false_alarm(double p, int t_suspicion, double duration_s = kFlightSeconds,
                                 double words_per_s = kWordsPerSecond) {
  return alarm_probability(p, t_suspicion, flight_words(duration_s, words_per_s));
}

}  // namespace afp::markov
