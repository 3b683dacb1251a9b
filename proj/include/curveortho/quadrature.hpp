#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "core.hpp"

namespace curveortho::quad {

/// Discrete Fourier coefficients c_m = (1/N) sum_j f_j e^{-2 pi i j m / N}, index m in [0, N).
inline std::vector<cplx> fourier_coefficients(const std::vector<cplx>& samples) {
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.fwd(out, samples);
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (auto& c : out) c *= inv;
  return out;
}

/// Trigonometric interpolation of periodic samples onto a grid `factor` times finer.
/// Spectrally accurate for samples of an analytic periodic function.
inline std::vector<cplx> upsample_periodic(const std::vector<cplx>& samples, int factor) {
  const int n = static_cast<int>(samples.size());
  if (factor <= 1) return samples;
  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, samples);
  const int m = n * factor;
  std::vector<cplx> padded(m, cplx{0.0});
  const int half = n / 2;
  for (int k = 0; k < half; ++k) padded[k] = spec[k];
  for (int k = half + 1; k < n; ++k) padded[m - n + k] = spec[k];
  // split the Nyquist mode symmetrically
  padded[half] = 0.5 * spec[half];
  padded[m - half] = 0.5 * spec[half];
  std::vector<cplx> out;
  fft.inv(out, padded);
  const double scale = static_cast<double>(factor);
  for (auto& v : out) v *= scale;
  return out;
}

template <typename T>
struct BasicGaussRule {
  std::vector<T> nodes;  // on [-1, 1]
  std::vector<T> weights;
};
using GaussRule = BasicGaussRule<double>;

/// Gauss-Legendre rule by Newton iteration on the three-term recurrence.
template <typename T>
BasicGaussRule<T> gauss_legendre_t(int n) {
  BasicGaussRule<T> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const T pi = std::acos(T(-1));
  const T stop = 4 * std::numeric_limits<T>::epsilon();
  auto legendre = [n](T x, T& p0, T& p1) {
    p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const T p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    T x = std::cos(pi * (i + T(0.75)) / (n + T(0.5)));
    T p0, p1;
    for (int it = 0; it < 100; ++it) {
      legendre(x, p0, p1);
      const T dx = p1 / (n * (x * p1 - p0) / (x * x - 1));
      x -= dx;
      if (std::abs(dx) < stop) break;
    }
    legendre(x, p0, p1);
    const T dp = n * (x * p1 - p0) / (x * x - 1);
    const T w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

inline GaussRule gauss_legendre(int n) { return gauss_legendre_t<double>(n); }

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace curveortho::quad
