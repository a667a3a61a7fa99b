#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "afp/errors.hpp"

namespace afp::fir {

inline std::vector<double> hamming(int taps) {
  std::vector<double> w(static_cast<std::size_t>(taps));
  if (taps == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int n = 0; n < taps; ++n)
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (taps - 1));
  return w;
}

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Windowed-sinc low-pass. `cutoff` is a fraction of Nyquist in (0, 1].
// Coefficients are normalized to unity DC gain.
inline std::vector<double> design_lowpass(int taps, double cutoff) {
  if (taps < 1) throw InvalidArgument("filter needs at least one tap");
  if (!(cutoff > 0.0 && cutoff <= 1.0)) throw InvalidArgument("cutoff must be in (0, 1]");
  auto h = hamming(taps);
  const double center = 0.5 * (taps - 1);
  for (int n = 0; n < taps; ++n) h[n] *= cutoff * sinc(cutoff * (n - center));
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& c : h) c /= sum;
  return h;
}

}  // namespace afp::fir
