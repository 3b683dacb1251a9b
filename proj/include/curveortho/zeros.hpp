#pragma once

// Zeros of P_n and the checks on their location and distribution.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "core.hpp"
#include "curve_geometry.hpp"
#include "oracle.hpp"
#include "polynomial.hpp"

namespace curveortho {

struct ZeroSet {
  int n = 0;
  std::vector<cplx> zeros;
  std::vector<std::optional<cplx>> phi_images;  // phi(zero) where defined
  double min_abs_phi = 0.0, max_abs_phi = 0.0, mean_abs_phi = 0.0;
  int without_phi = 0;
  double reconstruction_error = 0.0;  // relative, degrees <= 20 only
};

namespace detail {

inline cplx horner_ascending(const std::vector<cplx>& c, cplx z) {
  cplx acc = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
  return acc;
}

inline void fill_phi(ZeroSet& zs, const Curve* curve) {
  zs.phi_images.assign(zs.zeros.size(), std::nullopt);
  if (!curve) return;
  double lo = 1e300, hi = 0.0, sum = 0.0;
  int cnt = 0;
  for (std::size_t k = 0; k < zs.zeros.size(); ++k) {
    const auto w = curve->try_phi(zs.zeros[k]);
    if (!w) {
      ++zs.without_phi;
      continue;
    }
    zs.phi_images[k] = w;
    const double m = std::abs(*w);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    sum += m;
    ++cnt;
  }
  if (cnt > 0) {
    zs.min_abs_phi = lo;
    zs.max_abs_phi = hi;
    zs.mean_abs_phi = sum / cnt;
  }
}

}  // namespace detail

/// Zeros of a monic polynomial: balanced companion eigenvalues plus one Newton step.
inline ZeroSet roots(const PolyCoeffs& p, const Curve* curve = nullptr) {
  if (p.n < 1) throw Error(ErrorKind::Precondition, "roots: degree must be >= 1");
  if (std::abs(p.coeffs.back() - 1.0) > 1e-14) throw Error(ErrorKind::Precondition, "roots: polynomial must be monic");
  ZeroSet zs;
  zs.n = p.n;
  zs.zeros = monic_roots(p.coeffs);
  std::vector<cplx> d(p.n);
  for (int k = 1; k <= p.n; ++k) d[k - 1] = static_cast<double>(k) * p.coeffs[k];
  for (auto& z : zs.zeros) {
    const cplx dv = detail::horner_ascending(d, z);
    if (std::abs(dv) > 0.0) {
      const cplx step = detail::horner_ascending(p.coeffs, z) / dv;
      // keep the step only when it is a genuine refinement
      if (std::abs(step) < 1e-3 * (1.0 + std::abs(z))) z -= step;
    }
  }
  if (p.n <= 20) {
    std::vector<cplx> c{1.0};
    for (const auto& z : zs.zeros) {
      std::vector<cplx> next(c.size() + 1, cplx{0.0});
      for (std::size_t j = 0; j < c.size(); ++j) {
        next[j + 1] += c[j];
        next[j] -= z * c[j];
      }
      c = std::move(next);
    }
    double num = 0.0, den = 0.0;
    for (int k = 0; k <= p.n; ++k) {
      num = std::max(num, std::abs(c[k] - p.coeffs[k]));
      den = std::max(den, std::abs(p.coeffs[k]));
    }
    zs.reconstruction_error = num / den;
  }
  detail::fill_phi(zs, curve);
  return zs;
}

/// Zeros from the Hessenberg matrix of the extended-precision basis.
inline ZeroSet roots(const OrthogonalBasis& basis, int n, const Curve* curve = nullptr) {
  ZeroSet zs;
  zs.n = n;
  zs.zeros = basis.zeros(n);
  std::sort(zs.zeros.begin(), zs.zeros.end(), [](cplx a, cplx b) {
    return std::arg(a) < std::arg(b) || (std::arg(a) == std::arg(b) && std::abs(a) < std::abs(b));
  });
  detail::fill_phi(zs, curve);
  return zs;
}

struct EquilibriumStat {
  double ks = 1.0;
  int used = 0;
  int dropped = 0;
};

/// Kolmogorov-Smirnov distance between the angles of phi(zeros) and the uniform law on [0, 2 pi).
inline EquilibriumStat equilibrium_compare(const ZeroSet& zs) {
  std::vector<double> t;
  EquilibriumStat st;
  for (const auto& w : zs.phi_images) {
    if (!w) {
      ++st.dropped;
      continue;
    }
    double a = std::arg(*w);
    if (a < 0.0) a += kTwoPi;
    t.push_back(a / kTwoPi);
  }
  st.used = static_cast<int>(t.size());
  if (t.empty()) return st;
  std::sort(t.begin(), t.end());
  const double m = static_cast<double>(t.size());
  double d = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) d = std::max({d, (i + 1) / m - t[i], t[i] - i / m});
  st.ks = d;
  return st;
}

struct RegionSpec {
  enum class Side { Exterior, Interior } side = Side::Exterior;  // {|phi| >= c} or {|phi| <= c}
  double c = 0.0;
};

struct RegionReport {
  int count = 0;
  int allowed = 0;
  bool ok = true;
};

/// Zero count on {|phi(z)| >= c} (allowed 0) or {|phi(z)| <= c} (allowed u - 1),
/// with a 1e-3 buffer in |phi|. Zeros without phi lie deep inside and count as interior.
inline RegionReport zero_free_region_check(const ZeroSet& zs, const RegionSpec& k, int u = 1) {
  RegionReport r;
  const double buf = 1e-3;
  for (const auto& w : zs.phi_images) {
    if (k.side == RegionSpec::Side::Exterior) {
      if (w && std::abs(*w) >= k.c + buf) ++r.count;
    } else {
      if (!w || std::abs(*w) <= k.c - buf) ++r.count;
    }
  }
  r.allowed = k.side == RegionSpec::Side::Exterior ? 0 : u - 1;
  r.ok = r.count <= r.allowed;
  return r;
}

/// (1/n) sum log(1/|z - z_k|).
inline double discrete_potential(const ZeroSet& zs, cplx z) {
  double acc = 0.0;
  for (const auto& zk : zs.zeros) acc -= std::log(std::abs(z - zk));
  return acc / static_cast<double>(zs.zeros.size());
}

/// Equilibrium potential of L_rho at z outside it: log|phi'(inf)/phi(z)|.
inline double equilibrium_potential(const Curve& curve, cplx z) { return -std::log(curve.c1() * std::abs(curve.phi(z))); }

// ---------------------------------------------------------------------------
// limit angle tuples

struct AngleCluster {
  std::vector<cplx> tuple;            // e^{i theta_k}, k < u
  std::vector<int> degrees;           // n with e^{i(n+1) Theta_k} near the tuple
  std::vector<cplx> predicted_zeros;  // near-zeros of sum alpha_k Delta_i(a_k) W(a_k, t) e^{i theta_k} in G_rho
};

inline std::vector<AngleCluster> limit_angle_probe(const SzegoPack& pack, const SingularityData& sd,
                                                   const std::vector<int>& degrees, int grid = 60) {
  std::vector<AngleCluster> out;
  for (int n : degrees) {
    std::vector<cplx> t;
    for (int k = 0; k < sd.u; ++k) t.push_back(unit((n + 1) * sd.points[k].theta));
    bool placed = false;
    for (auto& c : out) {
      double d = 0.0;
      for (int k = 0; k < sd.u; ++k) d = std::max(d, std::abs(c.tuple[k] - t[k]));
      if (d < 1e-3) {
        c.degrees.push_back(n);
        placed = true;
        break;
      }
    }
    if (!placed) out.push_back({t, {n}, {}});
  }

  // grid over G_rho; local minima of |F| seed a Newton polish
  const Curve& curve = pack.curve();
  const double R = curve.diameter();
  const cplx c0 = curve.spec().c0;
  std::vector<cplx> pts;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const cplx z = c0 + R * cplx(-0.5 + (i + 0.5) / grid, -0.5 + (j + 0.5) / grid);
      const auto w = curve.try_phi(z);
      if (w && std::abs(*w) >= sd.rho - 0.02 * sd.rho) continue;
      pts.push_back(z);
    }
  auto inside = [&](cplx z) {
    const auto w = curve.try_phi(z);
    return !w || std::abs(*w) < sd.rho;
  };
  for (auto& c : out) {
    if (sd.u < 2) continue;  // a single kernel term never vanishes
    auto F = [&](cplx t) {
      cplx acc = 0.0;
      for (int k = 0; k < sd.u; ++k)
        acc += sd.points[k].alpha * sd.points[k].delta_i_a * kernel_W(pack.interior_map(), sd.points[k].a, t) * c.tuple[k];
      return acc;
    };
    std::vector<double> f(pts.size());
    double typical = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      f[i] = std::abs(F(pts[i]));
      typical += f[i];
    }
    typical /= std::max<std::size_t>(1, pts.size());
    const double step = R / grid;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool is_min = true;
      for (std::size_t j = 0; j < pts.size() && is_min; ++j)
        if (j != i && std::abs(pts[j] - pts[i]) < 1.5 * step && f[j] < f[i]) is_min = false;
      if (!is_min) continue;
      // Newton polish with a centred-difference derivative
      cplx t = pts[i];
      bool ok = false;
      for (int it = 0; it < 40 && inside(t); ++it) {
        const double hd = 1e-6 * R;
        const cplx d = (F(t + hd) - F(t - hd)) / (2.0 * hd);
        const cplx dt = F(t) / d;
        t -= dt;
        if (std::abs(dt) < 1e-13 * R) {
          ok = std::abs(F(t)) < 1e-8 * typical && inside(t);
          break;
        }
      }
      if (!ok) continue;
      bool dup = false;
      for (const auto& z : c.predicted_zeros) dup = dup || std::abs(z - t) < 1e-6 * R;
      if (!dup) c.predicted_zeros.push_back(t);
    }
  }
  return out;
}

}  // namespace curveortho
