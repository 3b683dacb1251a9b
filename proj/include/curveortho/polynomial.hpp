#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "laurent.hpp"

namespace curveortho {

/// Parlett-Reinsch diagonal balancing (radix 2) of a square matrix, in place.
inline void balance_matrix(Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

/// Roots of the monic polynomial x^n + c[n-1] x^{n-1} + ... + c[0], given as
/// ascending coefficients with c.back() == 1. Balanced companion matrix
/// eigenvalues, each refined by one Newton step.
inline std::vector<cplx> monic_roots(const std::vector<cplx>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
  balance_matrix(comp);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::IterationFailure, "companion eigenvalue solver failed");
  std::vector<cplx> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::vector<cplx> deriv(n);
  for (int k = 1; k <= n; ++k) deriv[k - 1] = static_cast<double>(k) * c[k];
  for (auto& z : roots) {
    const cplx p = horner(c, z);
    const cplx dp = horner(deriv, z);
    if (dp != 0.0) {
      const cplx step = p / dp;
      // keep the Newton step only when it does not increase the residual
      if (std::abs(horner(c, z - step)) <= std::abs(p)) z -= step;
    }
  }
  return roots;
}

}  // namespace curveortho
