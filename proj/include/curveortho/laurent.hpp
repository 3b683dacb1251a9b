#pragma once

#include <vector>

#include "core.hpp"

namespace curveortho {

/// Finite Laurent series  sum_k pos[k] z^k + sum_k neg[k] z^{-(k+1)}  about the origin.
struct LaurentSeries {
  std::vector<cplx> pos;
  std::vector<cplx> neg;

  static LaurentSeries constant(cplx c) { return {{c}, {}}; }

  cplx operator()(cplx z) const {
    cplx p = 0.0;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) p = p * z + *it;
    if (neg.empty()) return p;
    const cplx inv = 1.0 / z;
    cplx q = 0.0;
    for (auto it = neg.rbegin(); it != neg.rend(); ++it) q = (q + *it) * inv;
    return p + q;
  }

  cplx derivative(cplx z) const {
    cplx p = 0.0;
    for (std::size_t k = pos.size(); k-- > 1;) p = p * z + static_cast<double>(k) * pos[k];
    cplx q = 0.0;
    if (!neg.empty()) {
      const cplx inv = 1.0 / z;
      for (std::size_t k = neg.size(); k-- > 0;) q = q * inv - static_cast<double>(k + 1) * neg[k];
      q *= inv * inv;
    }
    return p + q;
  }

  bool has_negative_powers() const {
    for (const auto& c : neg)
      if (c != 0.0) return true;
    return false;
  }

  /// Leading nonzero positive power, or 0 when the series is bounded at infinity.
  int degree() const {
    for (std::size_t k = pos.size(); k-- > 0;)
      if (pos[k] != 0.0) return static_cast<int>(k);
    return 0;
  }

  /// Value at infinity for series without positive powers beyond z^0.
  cplx at_infinity() const { return pos.empty() ? cplx{0.0} : pos[0]; }
};

/// Horner evaluation of sum_k c[k] x^k.
inline cplx horner(const std::vector<cplx>& c, cplx x) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace curveortho
