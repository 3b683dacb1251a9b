#pragma once

// Analytic Jordan curves given by an explicit exterior conformal map
//   psi(w) = c1 w + c0 + sum_k cneg[k] w^{-(k+1)},   |w| > rho_hat,
// together with the inverse map phi, level curves L_r = psi(|w| = r), Schwarz
// reflection across L_1, an interior Riemann map and the kernel W.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "laurent.hpp"
#include "polynomial.hpp"

namespace curveortho {

struct CurveSpec {
  double c1 = 1.0;
  cplx c0 = 0.0;
  std::vector<cplx> cneg;
  double rho_hat_estimate = 0.0;
};

/// Equispaced trapezoid nodes on the w-circle of radius r and their images.
struct Contour {
  double r = 1.0;
  int N = 0;
  std::vector<cplx> nodes_w;
  std::vector<cplx> nodes_z;
  std::vector<cplx> derivative_samples;  // psi'(nodes_w)
};

namespace detail {

inline bool segments_cross(cplx a, cplx b, cplx c, cplx d) {
  auto orient = [](cplx p, cplx q, cplx r) {
    return (q.real() - p.real()) * (r.imag() - p.imag()) - (q.imag() - p.imag()) * (r.real() - p.real());
  };
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

/// True when the closed polygon through `pts` has no self-crossings.
inline bool is_simple_polygon(const std::vector<cplx>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const cplx a = pts[i], b = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, pts[j], pts[(j + 1) % n])) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Evaluation wrapper around a CurveSpec. Caches the zeros of psi' so that
/// log psi' and sqrt psi' carry the branch that is continuous on |w| > rho_hat
/// and positive at infinity.
class Curve {
 public:
  Curve() : Curve(CurveSpec{}) {}

  explicit Curve(CurveSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.c1 > 0.0)) throw Error(ErrorKind::Configuration, "curve: c1 must be positive");
    while (!spec_.cneg.empty() && spec_.cneg.back() == 0.0) spec_.cneg.pop_back();
    const int k = static_cast<int>(spec_.cneg.size());
    if (k > 0) {
      // w^{K+1} psi'(w)/c1 = w^{K+1} - sum_k (k+1) cneg[k]/c1 w^{K-1-k}
      std::vector<cplx> poly(k + 2, cplx{0.0});
      poly[k + 1] = 1.0;
      for (int j = 0; j < k; ++j) poly[k - 1 - j] -= static_cast<double>(j + 1) * spec_.cneg[j] / spec_.c1;
      derivative_zeros_ = monic_roots(poly);
    }
    for (const auto& b : derivative_zeros_) derivative_zero_radius_ = std::max(derivative_zero_radius_, std::abs(b));
    for (int j = 0; j < 1024; ++j) {
      const cplx z = psi(unit(node_angle(j, 1024)));
      diameter_ = std::max(diameter_, 2.0 * std::abs(z - spec_.c0));
    }
  }

  const CurveSpec& spec() const { return spec_; }
  double rho_hat() const { return spec_.rho_hat_estimate; }
  void set_rho_hat(double r) { spec_.rho_hat_estimate = r; }
  double c1() const { return spec_.c1; }
  /// phi'(infinity) = 1 / psi'(infinity).
  double phi_prime_inf() const { return 1.0 / spec_.c1; }
  double diameter() const { return diameter_; }
  double derivative_zero_radius() const { return derivative_zero_radius_; }
  const std::vector<cplx>& derivative_zeros() const { return derivative_zeros_; }
  bool is_circle() const { return spec_.cneg.empty(); }

  cplx psi(cplx w) const {
    cplx tail = 0.0;
    if (!spec_.cneg.empty()) {
      const cplx inv = 1.0 / w;
      for (auto it = spec_.cneg.rbegin(); it != spec_.cneg.rend(); ++it) tail = (tail + *it) * inv;
    }
    return spec_.c1 * w + spec_.c0 + tail;
  }

  cplx dpsi(cplx w) const {
    cplx tail = 0.0;
    if (!spec_.cneg.empty()) {
      const cplx inv = 1.0 / w;
      for (std::size_t k = spec_.cneg.size(); k-- > 0;) tail = tail * inv - static_cast<double>(k + 1) * spec_.cneg[k];
      tail *= inv * inv;
    }
    return spec_.c1 + tail;
  }

  /// Branch of log psi'(w) continuous on |w| > max|zeros of psi'| and real at infinity.
  cplx log_dpsi(cplx w) const {
    cplx acc = std::log(spec_.c1);
    for (const auto& b : derivative_zeros_) acc += std::log(1.0 - b / w);
    return acc;
  }

  cplx sqrt_dpsi(cplx w) const { return std::exp(0.5 * log_dpsi(w)); }

  /// Inverse map by damped Newton iteration seeded at (z - c0)/c1. Returns
  /// nullopt when the iteration fails or lands inside the univalence disk.
  std::optional<cplx> try_phi(cplx z, double* last_residual = nullptr) const {
    cplx w = (z - spec_.c0) / spec_.c1;
    if (spec_.cneg.empty()) return w;
    const double scale = std::max(1.0, std::abs(z));
    double res = std::abs(psi(w) - z);
    for (int it = 0; it < 50; ++it) {
      if (res <= 1e-15 * scale) break;
      const cplx d = dpsi(w);
      if (d == 0.0 || w == 0.0) break;
      cplx step = (psi(w) - z) / d;
      double new_res = std::abs(psi(w - step) - z);
      int halvings = 0;
      while (!(new_res < res) && halvings < 30) {
        step *= 0.5;
        new_res = std::abs(psi(w - step) - z);
        ++halvings;
      }
      if (!(new_res < res)) break;
      w -= step;
      res = new_res;
      if (std::abs(step) <= 1e-16 * std::abs(w)) break;
    }
    if (last_residual) *last_residual = res;
    if (!(res <= 1e-12 * scale)) return std::nullopt;
    if (std::abs(w) <= spec_.rho_hat_estimate || std::abs(w) <= derivative_zero_radius_) return std::nullopt;
    return w;
  }

  cplx phi(cplx z) const {
    double res = 0.0;
    if (auto w = try_phi(z, &res)) return *w;
    if (res <= 1e-12 * std::max(1.0, std::abs(z)))
      throw Error(ErrorKind::Domain, "phi: point lies inside G_rho_hat", res);
    throw Error(ErrorKind::IterationFailure, "phi: Newton iteration did not converge", res);
  }

  /// Schwarz reflection across L_1, z* = psi(1 / conj(phi(z))).
  cplx reflect(cplx z) const {
    const cplx w = phi(z);
    const double m = std::abs(w);
    if (spec_.rho_hat_estimate > 0.0 && !(m < 1.0 / spec_.rho_hat_estimate))
      throw Error(ErrorKind::Domain, "schwarz_reflect: point outside the band around L_1");
    return psi(1.0 / std::conj(w));
  }

  Contour contour(double r, int n) const {
    if (!(r > spec_.rho_hat_estimate)) throw Error(ErrorKind::Domain, "level_contour: r must exceed rho_hat");
    if (n < 4 || (n & (n - 1)) != 0) throw Error(ErrorKind::Domain, "level_contour: N must be a power of two >= 4");
    Contour c;
    c.r = r;
    c.N = n;
    c.nodes_w.resize(n);
    c.nodes_z.resize(n);
    c.derivative_samples.resize(n);
    for (int j = 0; j < n; ++j) {
      c.nodes_w[j] = r * unit(node_angle(j, n));
      c.nodes_z[j] = psi(c.nodes_w[j]);
      c.derivative_samples[j] = dpsi(c.nodes_w[j]);
    }
    // exact node values on the axes keep symmetric cases symmetric
    for (int q = 0; q < 4 && n % 4 == 0; ++q) {
      static constexpr cplx axes[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      const int j = q * n / 4;
      c.nodes_w[j] = r * axes[q];
      c.nodes_z[j] = psi(c.nodes_w[j]);
      c.derivative_samples[j] = dpsi(c.nodes_w[j]);
    }
    return c;
  }

  /// True when psi is univalent and locally injective on |w| >= r (sampled).
  bool univalent_beyond(double r, int samples = 512) const {
    if (r <= derivative_zero_radius_) return false;
    std::vector<cplx> pts(samples);
    for (int j = 0; j < samples; ++j) pts[j] = psi(r * unit(node_angle(j, samples)));
    return detail::is_simple_polygon(pts);
  }

 private:
  CurveSpec spec_;
  std::vector<cplx> derivative_zeros_;
  double derivative_zero_radius_ = 0.0;
  double diameter_ = 0.0;
};

// ---------------------------------------------------------------------------
// free-function wrappers

inline cplx psi_eval(const Curve& c, cplx w) {
  if (!(std::abs(w) > c.rho_hat())) throw Error(ErrorKind::Domain, "psi_eval: |w| must exceed rho_hat");
  return c.psi(w);
}

inline cplx psi_derivative(const Curve& c, cplx w) {
  if (!(std::abs(w) > c.rho_hat())) throw Error(ErrorKind::Domain, "psi_derivative: |w| must exceed rho_hat");
  return c.dpsi(w);
}

inline cplx phi_eval(const Curve& c, cplx z) { return c.phi(z); }

inline cplx schwarz_reflect(const Curve& c, cplx z) { return c.reflect(z); }

inline Contour level_contour(const Curve& c, double r, int n) { return c.contour(r, n); }

/// Smallest r (bisection, relative resolution 1e-6) for which psi' is zero-free
/// and psi(T_r) is a simple closed curve. Rejects curves with no such r < 1.
inline double estimate_rho_hat(const CurveSpec& spec) {
  Curve c(spec);
  const double r_deriv = c.derivative_zero_radius();
  if (!(r_deriv < 1.0) || !c.univalent_beyond(1.0, 1024))
    throw Error(ErrorKind::Configuration, "estimate_rho_hat: psi is not univalent on |w| >= 1; not an analytic Jordan curve");
  double lo = r_deriv, hi = 1.0;
  if (r_deriv == 0.0) {
    // no critical points: test a tiny radius directly
    if (c.univalent_beyond(1e-9)) return 0.0;
  }
  if (c.univalent_beyond(lo * (1.0 + 1e-9) + 1e-12)) return lo;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (c.univalent_beyond(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

inline Curve make_curve(CurveSpec spec) {
  spec.rho_hat_estimate = estimate_rho_hat(spec);
  return Curve(std::move(spec));
}

// ---------------------------------------------------------------------------
// interior Riemann map

struct InteriorFitOptions {
  int degree = 48;           // M
  int boundary_nodes = 0;    // 0 -> max(512, 8 M)
  double tolerance = 1e-10;  // acceptable boundary-modulus residual
  double nonvanishing_radius = -1.0;  // band Omega_r cap G_1 where phi_int must be zero-free; <0 -> rho_hat
};

/// Conformal map of G_1 onto the unit disk with phi_int(z0) = 0, phi_int'(z0) > 0.
/// Inside G_1 it is represented as (z - z0) exp(F(z)) with F a polynomial in
/// (z - z0)/scale; outside L_1 it is continued by phi_int(z) = 1/conj(phi_int(z*)).
class InteriorMap {
 public:
  InteriorMap() = default;

  InteriorMap(Curve curve, cplx z0, double scale, std::vector<cplx> log_coeffs)
      : curve_(std::move(curve)), z0_(z0), scale_(scale), log_coeffs_(std::move(log_coeffs)) {
    dlog_coeffs_.resize(log_coeffs_.size() > 1 ? log_coeffs_.size() - 1 : 0);
    for (std::size_t m = 1; m < log_coeffs_.size(); ++m)
      dlog_coeffs_[m - 1] = static_cast<double>(m) * log_coeffs_[m] / scale_;
    build_taylor();
    const cplx zb = curve_.psi(1.0);
    const cplx a = sqrt_derivative_inside(zb);
    const cplx b = sqrt_derivative_outside(zb, 1.0, 1.0);
    outer_sign_ = std::abs(a - b) <= std::abs(a + b) ? 1.0 : -1.0;
    pole_guard_ = 1e-8 * curve_.diameter();
  }

  cplx center() const { return z0_; }
  const std::vector<cplx>& taylor_coeffs() const { return taylor_; }
  const std::vector<cplx>& log_coeffs() const { return log_coeffs_; }
  double scale() const { return scale_; }
  double residual() const { return residual_; }
  void set_residual(double r) { residual_ = r; }
  const Curve& curve() const { return curve_; }
  double pole_guard() const { return pole_guard_; }

  cplx log_part(cplx z) const { return horner(log_coeffs_, (z - z0_) / scale_); }

  cplx value_inside(cplx z) const { return (z - z0_) * std::exp(log_part(z)); }

  cplx sqrt_derivative_inside(cplx z) const {
    const cplx f = log_part(z);
    const cplx q = 1.0 + (z - z0_) * horner(dlog_coeffs_, (z - z0_) / scale_);
    return std::exp(0.5 * f) * std::sqrt(q);
  }

  /// Evaluation pair (phi_int(z), sqrt(phi_int'(z))) with the w-coordinate when
  /// z is known to lie in Omega_rho_hat (w = phi(z)); pass nullopt otherwise.
  struct Point {
    cplx value;
    cplx sqrt_derivative;
  };

  Point at(cplx z, std::optional<cplx> w) const {
    if (w && std::abs(*w) > 1.0) {
      const cplx zs = curve_.psi(1.0 / std::conj(*w));
      const cplx t_in = value_inside(zs);
      return {1.0 / std::conj(t_in), outer_sign_ * sqrt_derivative_outside(z, *w, 0.0)};
    }
    return {value_inside(z), sqrt_derivative_inside(z)};
  }

  Point at(cplx z) const { return at(z, locate(z)); }

  cplx value(cplx z) const { return at(z).value; }
  cplx sqrt_derivative(cplx z) const { return at(z).sqrt_derivative; }
  cplx derivative(cplx z) const {
    const cplx s = sqrt_derivative(z);
    return s * s;
  }

  /// phi(z) when z lies outside G_1, checked against the continuation domain G_{1/rho_hat}.
  std::optional<cplx> locate(cplx z) const {
    auto w = curve_.try_phi(z);
    if (!w || std::abs(*w) <= 1.0) return std::nullopt;
    if (curve_.rho_hat() > 0.0 && !(std::abs(*w) < 1.0 / curve_.rho_hat()))
      throw Error(ErrorKind::Domain, "interior map: point outside G_{1/rho_hat}");
    return w;
  }

  static cplx kernel(const Point& zeta, const Point& z) {
    return z.sqrt_derivative * zeta.sqrt_derivative / (zeta.value - z.value);
  }

 private:
  cplx sqrt_derivative_outside(cplx z, cplx w, double) const {
    (void)z;
    const cplx zs = curve_.psi(1.0 / std::conj(w));
    const cplx a = std::conj(sqrt_derivative_inside(zs));
    const cplx b = std::conj(curve_.sqrt_dpsi(1.0 / std::conj(w)));
    const cplx c = 1.0 / curve_.sqrt_dpsi(w);
    return a * b * c / (w * std::conj(value_inside(zs)));
  }

  void build_taylor() {
    // exp of the log-part series in u = (z - z0)/scale, then phi_int = scale * u * exp(F)
    const std::size_t m = log_coeffs_.size();
    std::vector<cplx> e(m, cplx{0.0});
    e[0] = std::exp(log_coeffs_[0]);
    for (std::size_t k = 1; k < m; ++k) {
      cplx acc = 0.0;
      for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * log_coeffs_[j] * e[k - j];
      e[k] = acc / static_cast<double>(k);
    }
    taylor_.assign(m + 1, cplx{0.0});
    double sp = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      taylor_[k + 1] = e[k] / sp;  // coefficient of (z - z0)^{k+1}
      sp *= scale_;
    }
  }

  Curve curve_;
  cplx z0_ = 0.0;
  double scale_ = 1.0;
  std::vector<cplx> log_coeffs_;
  std::vector<cplx> dlog_coeffs_;
  std::vector<cplx> taylor_;
  double outer_sign_ = 1.0;
  double residual_ = 0.0;
  double pole_guard_ = 1e-8;
};

namespace detail {

inline InteriorMap fit_interior_at(const Curve& curve, cplx z0, const InteriorFitOptions& opt) {
  const int m = opt.degree;
  const int n = opt.boundary_nodes > 0 ? opt.boundary_nodes : std::max(512, 8 * m);
  std::vector<cplx> zb(n);
  double scale = 0.0;
  for (int j = 0; j < n; ++j) {
    zb[j] = curve.psi(unit(node_angle(j, n)));
    scale = std::max(scale, std::abs(zb[j] - z0));
  }
  // Re F = -log|z - z0| on L_1 with Im F(z0) = 0; unknowns Re a_0, Re a_k, Im a_k.
  Eigen::MatrixXd a(n, 2 * m + 1);
  Eigen::VectorXd rhs(n);
  for (int j = 0; j < n; ++j) {
    const cplx u = (zb[j] - z0) / scale;
    cplx p = 1.0;
    a(j, 0) = 1.0;
    for (int k = 1; k <= m; ++k) {
      p *= u;
      a(j, k) = p.real();
      a(j, m + k) = -p.imag();
    }
    rhs(j) = -std::log(std::abs(zb[j] - z0));
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(rhs);
  std::vector<cplx> coeffs(m + 1);
  coeffs[0] = x(0);
  for (int k = 1; k <= m; ++k) coeffs[k] = cplx(x(k), x(m + k));
  InteriorMap map(curve, z0, scale, std::move(coeffs));

  // residual on a fresh, offset boundary grid
  const int nf = 2 * n + 1;
  double residual = 0.0;
  for (int j = 0; j < nf; ++j) {
    const cplx z = curve.psi(unit(kTwoPi * (j + 0.37) / nf));
    residual = std::max(residual, std::abs(std::abs(map.value_inside(z)) - 1.0));
  }
  map.set_residual(residual);
  return map;
}

/// The principal square root used inside G_1 is the analytic branch only when
/// the continuous argument of 1 + (z - z0) F'(z) stays inside (-pi, pi).
inline bool principal_branch_valid(const InteriorMap& map, const Curve& curve) {
  const int n = 2048;
  std::vector<double> arg(n), weight(n);
  double prev = 0.0, total_w = 0.0, mean = 0.0;
  for (int j = 0; j < n; ++j) {
    const cplx w = unit(node_angle(j, n));
    const cplx z = curve.psi(w);
    const cplx s = map.sqrt_derivative_inside(z);
    const cplx q = s * s / std::exp(map.log_part(z));
    double a = std::arg(q);
    if (j > 0) {
      while (a - prev > kPi) a -= kTwoPi;
      while (a - prev < -kPi) a += kTwoPi;
    }
    arg[j] = a;
    prev = a;
    weight[j] = std::abs(s * s * curve.dpsi(w));  // harmonic measure density from z0
    total_w += weight[j];
    mean += weight[j] * a;
  }
  mean /= total_w;
  const double shift = kTwoPi * std::round(mean / kTwoPi);
  for (double a : arg)
    if (std::abs(a - shift) >= 0.99 * kPi) return false;
  return true;
}

}  // namespace detail

/// Boundary-collocation fit of the interior map about z0. Retries with centers
/// pulled toward c0 when phi_int would vanish on the band Omega_r cap G_1.
inline InteriorMap fit_interior_map(const Curve& curve, cplx z0, const InteriorFitOptions& opt = {}) {
  if (opt.degree < 8) throw Error(ErrorKind::Configuration, "fit_interior_map: degree must be >= 8");
  if (auto w = curve.try_phi(z0); w && std::abs(*w) >= 1.0)
    throw Error(ErrorKind::Domain, "fit_interior_map: z0 must lie inside L_1");
  const double band = opt.nonvanishing_radius >= 0.0 ? opt.nonvanishing_radius : curve.rho_hat();
  const cplx c0 = curve.spec().c0;
  for (double pull : {1.0, 0.5, 0.25, 0.0}) {
    const cplx center = c0 + pull * (z0 - c0);
    if (auto w = curve.try_phi(center); w && std::abs(*w) > band) continue;
    InteriorMap map = detail::fit_interior_at(curve, center, opt);
    if (map.residual() > opt.tolerance)
      throw Error(ErrorKind::FitFailure, "fit_interior_map: boundary residual above tolerance", map.residual());
    if (!detail::principal_branch_valid(map, curve))
      throw Error(ErrorKind::Configuration, "fit_interior_map: sqrt(phi_int') branch not principal for this center; supply z0 manually");
    return map;
  }
  throw Error(ErrorKind::Configuration,
              "fit_interior_map: interior map vanishes on the band for every retry center; supply z0 manually");
}

/// W(zeta, z) = sqrt(phi_int'(z)) sqrt(phi_int'(zeta)) / (phi_int(zeta) - phi_int(z)).
inline cplx kernel_W(const InteriorMap& map, cplx zeta, cplx z) {
  if (std::abs(zeta - z) < map.pole_guard()) throw Error(ErrorKind::Coincidence, "kernel_W: zeta coincides with z");
  return InteriorMap::kernel(map.at(zeta), map.at(z));
}

}  // namespace curveortho
