#pragma once

// Positive analytic weights on L_1 and their Szego functions.
//
// Two weight families are supported:
//   generic   h(z) = V(z) conj(V(z*)) on L_1, V zero-free near L_1;
//   singular  h(z) = |omega(z)|^{-2} prod_k |z - a_k|^{2 lambda_k}, a_k on L_rho.

#include <algorithm>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "core.hpp"
#include "curve_geometry.hpp"
#include "laurent.hpp"
#include "polynomial.hpp"
#include "quadrature.hpp"

namespace curveortho {

struct SingularPoint {
  cplx a;
  double lambda;
};

struct WeightSpec {
  enum class Kind { GenericAnalytic, AlgebraicSingular };
  Kind kind = Kind::GenericAnalytic;
  LaurentSeries V = LaurentSeries::constant(1.0);      // generic family
  LaurentSeries omega = LaurentSeries::constant(1.0);  // singular family
  std::vector<SingularPoint> singularities;            // sorted by decreasing lambda
  std::optional<double> rho;    // analyticity radius of Delta_e (generic: declared)
  std::optional<double> sigma;  // singular family: inner radius of the cut system

  static WeightSpec unit() { return {}; }
  static WeightSpec generic(LaurentSeries v, std::optional<double> rho = std::nullopt) {
    WeightSpec w;
    w.V = std::move(v);
    w.rho = rho;
    return w;
  }
  static WeightSpec singular(LaurentSeries omega, std::vector<SingularPoint> pts, std::optional<double> sigma = std::nullopt) {
    WeightSpec w;
    w.kind = Kind::AlgebraicSingular;
    w.omega = std::move(omega);
    w.singularities = std::move(pts);
    w.sigma = sigma;
    return w;
  }
};

// ---------------------------------------------------------------------------
// Szego functions on the unit disk

/// D_i(w; f) = exp(c_0/2 + sum_{m=1..K} c_m w^m) and its exterior reflection,
/// built from the Fourier coefficients c_m of log f on the unit circle.
class DiskSzego {
 public:
  DiskSzego() : coeffs_{0.0} {}
  explicit DiskSzego(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    coeffs_[0] = coeffs_[0].real();
  }

  const std::vector<cplx>& coefficients() const { return coeffs_; }
  int K() const { return static_cast<int>(coeffs_.size()) - 1; }

  cplx log_interior(cplx w) const {
    cplx acc = 0.0;
    for (std::size_t m = coeffs_.size(); m-- > 1;) acc = (acc + coeffs_[m]) * w;
    return 0.5 * coeffs_[0] + acc;
  }
  cplx interior(cplx w) const { return std::exp(log_interior(w)); }

  /// D_e(w) = 1 / conj(D_i(1/conj(w))), defined for |w| >= 1 (and w = infinity).
  cplx exterior(cplx w) const {
    const cplx inv = 1.0 / w;
    cplx acc = 0.0;
    for (std::size_t m = coeffs_.size(); m-- > 1;) acc = (acc + std::conj(coeffs_[m])) * inv;
    return std::exp(-0.5 * coeffs_[0] - acc);
  }
  double exterior_at_infinity() const { return std::exp(-0.5 * coeffs_[0].real()); }

 private:
  std::vector<cplx> coeffs_;
};

namespace detail {

inline double coefficient_scale(const std::vector<cplx>& c, int upto) {
  double s = 0.0;
  for (int m = 0; m <= upto && m < static_cast<int>(c.size()); ++m) s = std::max(s, std::abs(c[m]));
  return std::max(s, 1e-300);
}

}  // namespace detail

inline DiskSzego disk_szego_interior(const std::vector<double>& f_samples, int K) {
  const int n = static_cast<int>(f_samples.size());
  if (K < 1 || n < 2 * K) throw Error(ErrorKind::Precondition, "disk_szego: need N >= 2K samples");
  std::vector<cplx> logs(n);
  for (int j = 0; j < n; ++j) {
    if (!(f_samples[j] > 0.0)) throw Error(ErrorKind::Domain, "disk_szego: non-positive sample", f_samples[j]);
    logs[j] = std::log(f_samples[j]);
  }
  auto all = quad::fourier_coefficients(logs);
  std::vector<cplx> c(all.begin(), all.begin() + K + 1);
  const double scale = detail::coefficient_scale(c, K);
  if (n > 2 * K && std::abs(all[K]) > 1e-13 * std::max(1.0, scale))
    throw Error(ErrorKind::Resolution, "disk_szego: Fourier tail not resolved; increase N/K", std::abs(all[K]));
  return DiskSzego(std::move(c));
}

/// Exterior variant; identical data, evaluated through DiskSzego::exterior.
inline DiskSzego disk_szego_exterior(const std::vector<double>& f_samples, int K) {
  return disk_szego_interior(f_samples, K);
}

/// Samples f on N equispaced unit-circle points, doubling N until the Fourier
/// tail drops below 1e-14 relative (or K reaches 4096).
inline DiskSzego disk_szego_adaptive(const std::function<double(double)>& f_of_angle, int n0 = 256) {
  for (int n = n0;; n *= 2) {
    std::vector<cplx> logs(n);
    for (int j = 0; j < n; ++j) {
      const double v = f_of_angle(node_angle(j, n));
      if (!(v > 0.0)) throw Error(ErrorKind::Domain, "disk_szego: non-positive weight sample", v);
      logs[j] = std::log(v);
    }
    auto all = quad::fourier_coefficients(logs);
    const int k = n / 2;
    const double scale = detail::coefficient_scale(all, k);
    double tail = 0.0;
    for (int m = k - k / 8; m <= k; ++m) tail = std::max(tail, std::abs(all[m]));
    if (tail < 1e-14 * std::max(scale, 1e-2) || k >= 4096) {
      if (tail >= 1e-10 * std::max(scale, 1e-2))
        throw Error(ErrorKind::Resolution, "disk_szego: log-weight Fourier series not resolved at K = 4096", tail);
      // trim trailing coefficients below the noise floor
      int last = k;
      while (last > 1 && std::abs(all[last]) < 1e-17 * std::max(scale, 1.0)) --last;
      return DiskSzego(std::vector<cplx>(all.begin(), all.begin() + last + 1));
    }
  }
}

// ---------------------------------------------------------------------------
// boundary correspondence of the interior map

/// Angles theta_j with arg phi_int(psi(e^{i theta_j})) = 2 pi j / N.
inline std::vector<double> boundary_correspondence(const InteriorMap& map, int n) {
  const Curve& curve = map.curve();
  const int fine = 8 * n;
  std::vector<double> th(fine + 1), ar(fine + 1);
  double prev = 0.0;
  for (int j = 0; j <= fine; ++j) {
    th[j] = node_angle(j, fine);
    double a = std::arg(map.value_inside(curve.psi(unit(th[j]))));
    if (j > 0) {
      while (a - prev > kPi) a -= kTwoPi;
      while (a - prev < -kPi) a += kTwoPi;
    }
    ar[j] = a;
    prev = a;
  }
  std::vector<double> out(n);
  const double base = ar[0];
  for (int j = 0; j < n; ++j) {
    // the same angle shifted into the unwrapped range [base, base + 2 pi)
    const double tau = base + std::fmod(node_angle(j, n) - base + 4.0 * kTwoPi, kTwoPi);
    // arg is increasing along the positively oriented boundary
    const auto it_hi = std::upper_bound(ar.begin(), ar.end(), tau);
    const std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(it_hi - ar.begin(), 1), ar.size() - 1);
    const std::size_t idx = hi - 1;
    double t = th[idx];
    if (ar[hi] != ar[idx]) t += (tau - ar[idx]) / (ar[hi] - ar[idx]) * (th[hi] - th[idx]);
    for (int it = 0; it < 20; ++it) {
      const cplx w = unit(t);
      const cplx z = curve.psi(w);
      const cplx v = map.value_inside(z);
      const cplx s = map.sqrt_derivative_inside(z);
      const double g = std::arg(v * unit(-tau));
      const double dg = (s * s * curve.dpsi(w) * kI * w / v).imag();
      const double step = g / dg;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    out[j] = t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// derived geometry of the singular family

struct SingularGeometry {
  double rho = 0.0;
  double sigma = 0.0;
  int u = 1;
  std::vector<double> theta;       // Theta_k in [0, 2 pi)
  std::vector<cplx> rho_k;         // phi(a_k)
  std::vector<cplx> sigma_k;       // sigma e^{i Theta_k}
  std::vector<cplx> phi_int_a;     // phi_int(a_k)
  std::vector<std::vector<cplx>> q_zeros;  // zeros of (psi(w)-psi(rho_k))/(c1 (w-rho_k)) in 1/w form
};

inline bool is_integer(double x) { return x == std::floor(x); }

// ---------------------------------------------------------------------------

/// Evaluators for Delta_e, Delta_i, their continuations and the weight h.
class SzegoPack {
 public:
  struct Generic {
    LaurentSeries V;
    double circle = 1.0;            // radius of the w-circle carrying the exterior data
    std::vector<cplx> ext;          // ext[M-1] = c_{-M} circle^{-M}
    double log_mean = 0.0;          // c_0 (real)
    DiskSzego interior;             // D_i(.; h o delta)
  };
  struct Singular {
    LaurentSeries omega;
    std::vector<SingularPoint> pts;
    SingularGeometry geo;
    DiskSzego omega_interior;       // D_i(.; |omega|^{-2} o delta)
    cplx interior_phase = 1.0;      // unimodular factor making Delta_i(z0) > 0
    std::vector<cplx> log_dk_anchor;  // log of phi_int'(a_k)
  };

  SzegoPack(InteriorMap map, WeightSpec spec, double rho, std::variant<Generic, Singular> data)
      : map_(std::move(map)), spec_(std::move(spec)), rho_(rho), data_(std::move(data)) {}

  const Curve& curve() const { return map_.curve(); }
  const InteriorMap& interior_map() const { return map_; }
  const WeightSpec& weight() const { return spec_; }
  double rho() const { return rho_; }
  bool singular() const { return std::holds_alternative<Singular>(data_); }
  const Singular& singular_data() const { return std::get<Singular>(data_); }
  const Generic& generic_data() const { return std::get<Generic>(data_); }

  double delta_e_inf() const {
    if (auto g = std::get_if<Generic>(&data_)) return std::exp(-0.5 * g->log_mean);
    const auto& s = std::get<Singular>(data_);
    double v = s.omega.at_infinity().real();
    for (const auto& p : s.pts) v *= std::pow(curve().c1(), -p.lambda);
    return v;
  }

  /// Delta_e at z = psi(w) for a known w-coordinate.
  cplx delta_e_w(cplx w) const {
    const double m = std::abs(w);
    if (auto g = std::get_if<Generic>(&data_)) {
      if (!(m > rho_)) throw Error(ErrorKind::Domain, "Delta_e: |phi(z)| must exceed rho");
      const cplx x = g->circle / w;
      cplx acc = 0.0;
      for (std::size_t k = g->ext.size(); k-- > 0;) acc = (acc + g->ext[k]) * x;
      return std::exp(-0.5 * g->log_mean - acc);
    }
    const auto& s = std::get<Singular>(data_);
    check_cut(s, w);
    const cplx z = curve().psi(w);
    cplx logv = 0.0;
    for (std::size_t k = 0; k < s.pts.size(); ++k) logv += -s.pts[k].lambda * log_q(s, k, w, true);
    return s.omega(z) * std::exp(logv);
  }

  cplx delta_e(cplx z) const { return delta_e_w(curve().phi(z)); }

  /// Delta_i on the closed interior G_1 (also valid slightly outside for the
  /// generic family through the disk Szego series).
  cplx delta_i(cplx z) const { return delta_i_at(z, map_.at(z, std::nullopt)); }

  /// 1/Delta_i on G_{1/rho}; outside G_1 through
  /// 1/Delta_i(z) = Delta_e(z) conj(Delta_e(z*)) conj(Delta_i(z*)).
  cplx inv_delta_i(cplx z, std::optional<cplx> w = std::nullopt) const {
    if (!w) {
      auto loc = curve().try_phi(z);
      if (loc && std::abs(*loc) > 1.0) w = loc;
    }
    if (w && std::abs(*w) > 1.0) {
      if (!(std::abs(*w) < 1.0 / rho_)) throw Error(ErrorKind::Domain, "1/Delta_i: point outside G_{1/rho}");
      const cplx ws = 1.0 / std::conj(*w);
      const cplx zs = curve().psi(ws);
      return delta_e_w(*w) * std::conj(delta_e_w(ws)) * std::conj(delta_i(zs));
    }
    return 1.0 / delta_i(z);
  }

  /// Product Delta_e Delta_i at z = psi(w), valid on Omega_rho cap G_{1/rho}.
  cplx delta_product_w(cplx w) const {
    const cplx z = curve().psi(w);
    if (std::abs(w) > 1.0) {
      const cplx ws = 1.0 / std::conj(w);
      return 1.0 / std::conj(delta_e_w(ws) * delta_i(curve().psi(ws)));
    }
    return delta_e_w(w) * delta_i(z);
  }

  /// Weight value at a point of L_1.
  double h(cplx z) const {
    if (auto w = curve().try_phi(z); !w || std::abs(std::abs(*w) - 1.0) > 1e-8)
      throw Error(ErrorKind::Domain, "h_eval: point is not on L_1");
    return h_unchecked(z);
  }

  double h_unchecked(cplx z) const {
    if (auto g = std::get_if<Generic>(&data_)) return std::norm(g->V(z));
    const auto& s = std::get<Singular>(data_);
    double v = 1.0 / std::norm(s.omega(z));
    for (const auto& p : s.pts) v *= std::pow(std::abs(z - p.a), 2.0 * p.lambda);
    return v;
  }

  /// Weight continued off L_1 as V(z) conj(V(z*)) (generic family only).
  cplx h_continued(cplx z) const {
    const auto& g = std::get<Generic>(data_);
    return g.V(z) * std::conj(g.V(curve().reflect(z)));
  }

  /// log of (phi(z)/(z - a_k))^{-1} c1-normalised pieces: returns
  /// log(1 - rho_k/w) + log c1 + sum log(1 - gamma_i / w), the continuous branch
  /// of log((psi(w) - psi(rho_k)) / w) that is real at infinity.
  cplx log_q(const Singular& s, std::size_t k, cplx w, bool /*principal*/) const {
    cplx acc = std::log(1.0 - s.geo.rho_k[k] / w) + std::log(curve().c1());
    for (const auto& g : s.geo.q_zeros[k]) acc += std::log(1.0 - g / w);
    return acc;
  }

  /// (phi(z)/(z - a_j))^{lambda_j} at z = psi(w) in the branch of Delta_e.
  cplx singular_factor(std::size_t j, cplx w) const {
    const auto& s = std::get<Singular>(data_);
    return std::exp(-s.pts[j].lambda * log_q(s, j, w, true));
  }

  /// Cut-proximity guard of the singular family (0.02 rho in the w-plane).
  void check_cut(const Singular& s, cplx w) const {
    const double m = std::abs(w);
    if (!(m > s.geo.sigma)) throw Error(ErrorKind::Domain, "Delta_e: point inside G_sigma");
    if (m > s.geo.rho + 0.02 * s.geo.rho) return;
    for (std::size_t k = 0; k < s.pts.size(); ++k) {
      const cplx e = s.geo.rho_k[k] / s.geo.rho;
      if (is_integer(s.pts[k].lambda)) {
        if (std::abs(w - s.geo.rho_k[k]) < 0.02 * s.geo.rho)
          throw Error(ErrorKind::CutProximity, "Delta_e: too close to a pole");
        continue;
      }
      // distance to the radial segment [sigma_k, rho_k]
      const double along = (w * std::conj(e)).real();
      const double clamped = std::clamp(along, s.geo.sigma, s.geo.rho);
      if (std::abs(w - clamped * e) < 0.02 * s.geo.rho)
        throw Error(ErrorKind::CutProximity, "Delta_e: too close to a branch cut");
    }
  }

 private:
  cplx delta_i_at(cplx z, const InteriorMap::Point& p) const {
    if (auto g = std::get_if<Generic>(&data_)) return g->interior.interior(p.value);
    const auto& s = std::get<Singular>(data_);
    cplx logv = s.omega_interior.log_interior(p.value);
    for (std::size_t k = 0; k < s.pts.size(); ++k) {
      const cplx tk = s.geo.phi_int_a[k];
      const cplx num = std::log(1.0 - std::conj(tk) * p.value);
      logv += s.pts[k].lambda * (num - log_divided_difference(s, k, z));
    }
    return s.interior_phase * std::exp(logv);
  }

 public:
  /// Continuous log of (phi_int(z) - phi_int(a_k)) / (z - a_k), tracked along
  /// the segment from a_k to z starting at log phi_int'(a_k).
  cplx log_divided_difference(const Singular& s, std::size_t k, cplx z) const {
    const cplx a = s.pts[k].a;
    const cplx ta = s.geo.phi_int_a[k];
    const double guard = 1e-7 * curve().diameter();
    auto dd = [&](cplx x) {
      if (std::abs(x - a) < guard) {
        const cplx sd = map_.sqrt_derivative(a);
        return sd * sd;
      }
      return (map_.value(x) - ta) / (x - a);
    };
    if (std::abs(z - a) < guard) return s.log_dk_anchor[k];
    for (int steps = 16; steps <= 4096; steps *= 2) {
      cplx acc = s.log_dk_anchor[k];
      cplx prev = dd(a);
      bool ok = true;
      for (int j = 1; j <= steps; ++j) {
        const cplx x = a + (z - a) * (static_cast<double>(j) / steps);
        const cplx cur = dd(x);
        const cplx ratio = cur / prev;
        if (std::abs(std::arg(ratio)) > kPi / 4) {
          ok = false;
          break;
        }
        acc += std::log(ratio);
        prev = cur;
      }
      if (ok) return acc;
    }
    throw Error(ErrorKind::Resolution, "Delta_i: argument tracking failed");
  }

 private:
  InteriorMap map_;
  WeightSpec spec_;
  double rho_;
  std::variant<Generic, Singular> data_;
};

// ---------------------------------------------------------------------------
// builders

namespace detail {

/// Laurent coefficients of log H(w), H(w) = V(psi(w)) conj(V(psi(1/conj w))), on |w| = s.
inline SzegoPack::Generic exterior_data_on_circle(const Curve& curve, const LaurentSeries& v, double s) {
  for (int n = 256;; n *= 2) {
    std::vector<cplx> logs(n);
    double prev = 0.0;
    for (int j = 0; j < n; ++j) {
      const cplx w = s * unit(node_angle(j, n));
      const cplx hv = v(curve.psi(w)) * std::conj(v(curve.psi(1.0 / std::conj(w))));
      if (hv == 0.0) throw Error(ErrorKind::Domain, "weight factor vanishes on the Laurent circle");
      double a = std::arg(hv);
      if (j > 0) {
        while (a - prev > kPi) a -= kTwoPi;
        while (a - prev < -kPi) a += kTwoPi;
      }
      prev = a;
      logs[j] = cplx(std::log(std::abs(hv)), a);
    }
    {
      const cplx w = s * unit(node_angle(n - 1, n));
      (void)w;
      const cplx h0 = v(curve.psi(s)) * std::conj(v(curve.psi(1.0 / s)));
      double a0 = std::arg(h0);
      double wrap = prev + (std::arg(h0) - prev);
      while (a0 - prev > kPi) a0 -= kTwoPi;
      while (a0 - prev < -kPi) a0 += kTwoPi;
      (void)wrap;
      if (std::abs(a0 - logs[0].imag()) > 1.0)
        throw Error(ErrorKind::Configuration,
                    "generic weight: log H winds around the Laurent circle; declared rho is below a zero of V");
    }
    auto c = quad::fourier_coefficients(logs);
    const int half = n / 2;
    double scale = 0.0;
    for (int m = 1; m < half; ++m) scale = std::max({scale, std::abs(c[m]), std::abs(c[n - m])});
    scale = std::max(scale, 1e-300);
    double tail = 0.0;
    for (int m = half - half / 8; m < half; ++m) tail = std::max({tail, std::abs(c[m]), std::abs(c[n - m])});
    if (tail < 1e-15 * std::max(scale, 1.0) || n >= 8192) {
      if (tail > 1e-10 * std::max(scale, 1.0))
        throw Error(ErrorKind::Resolution, "generic weight: exterior Laurent data not resolved", tail);
      SzegoPack::Generic g;
      g.V = v;
      g.circle = s;
      g.log_mean = c[0].real();
      int last = half - 1;
      while (last > 0 && std::abs(c[n - last]) < 1e-18 * std::max(scale, 1.0)) --last;
      g.ext.resize(last);
      for (int m = 1; m <= last; ++m) g.ext[m - 1] = c[n - m];
      return g;
    }
  }
}

/// Root-test radius of sum b_m (s/w)^m from the last decade of coefficients
/// above the noise floor; 0 when the data vanish.
inline double coefficient_decay_radius(const std::vector<cplx>& b, double s) {
  double scale = 0.0;
  for (const auto& x : b) scale = std::max(scale, std::abs(x));
  if (scale < 1e-14) return 0.0;
  std::vector<double> xs, ys;
  for (std::size_t m = 0; m < b.size(); ++m) {
    const double a = std::abs(b[m]);
    if (a < 1e-12 * scale) break;
    xs.push_back(static_cast<double>(m + 1));
    ys.push_back(std::log(a));
  }
  if (xs.size() < 4) return 0.0;
  const std::size_t start = xs.size() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double cnt = static_cast<double>(xs.size() - start);
  for (std::size_t i = start; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return s * std::exp(slope);
}

/// Cauchy-Hadamard estimate of the exterior analyticity radius from the decay
/// of the negative-frequency Fourier coefficients of log h o psi on |w| = 1.
inline double estimate_exterior_radius(const Curve& curve, const LaurentSeries& v) {
  const int n = 1024;
  std::vector<cplx> logs(n);
  for (int j = 0; j < n; ++j) logs[j] = std::log(std::norm(v(curve.psi(unit(node_angle(j, n))))));
  auto c = quad::fourier_coefficients(logs);
  double scale = 0.0;
  for (int m = 1; m < n / 2; ++m) scale = std::max(scale, std::abs(c[n - m]));
  if (scale < 1e-14) return curve.rho_hat();
  std::vector<double> xs, ys;
  for (int m = 1; m < n / 2; ++m) {
    const double a = std::abs(c[n - m]);
    if (a < 1e-12 * scale) break;
    xs.push_back(m);
    ys.push_back(std::log(a));
  }
  if (xs.size() < 4) return curve.rho_hat();
  const std::size_t start = xs.size() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double cnt = static_cast<double>(xs.size() - start);
  for (std::size_t i = start; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return std::max(curve.rho_hat(), std::min(0.98, std::exp(slope) + 0.02));
}

inline DiskSzego interior_szego(const InteriorMap& map, const std::function<double(cplx)>& weight) {
  // adaptive in the number of boundary-correspondence nodes
  for (int n = 256;; n *= 2) {
    const auto theta = boundary_correspondence(map, n);
    std::vector<cplx> logs(n);
    for (int j = 0; j < n; ++j) {
      const double hv = weight(map.curve().psi(unit(theta[j])));
      if (!(hv > 0.0)) throw Error(ErrorKind::Domain, "interior Szego: non-positive weight sample", hv);
      logs[j] = std::log(hv);
    }
    auto c = quad::fourier_coefficients(logs);
    const int half = n / 2;
    double scale = 0.0;
    for (int m = 0; m < half; ++m) scale = std::max(scale, std::abs(c[m]));
    double tail = 0.0;
    for (int m = half - half / 8; m < half; ++m) tail = std::max(tail, std::abs(c[m]));
    if (tail < 1e-15 * std::max(scale, 1.0) || n >= 8192) {
      if (tail > 1e-10 * std::max(scale, 1.0))
        throw Error(ErrorKind::Resolution, "interior Szego: Fourier data not resolved", tail);
      int last = half - 1;
      while (last > 1 && std::abs(c[last]) < 1e-18 * std::max(scale, 1.0)) --last;
      return DiskSzego(std::vector<cplx>(c.begin(), c.begin() + last + 1));
    }
  }
}

inline void verify_boundary_moduli(const SzegoPack& pack, double tol) {
  const Curve& curve = pack.curve();
  const int n = 97;
  for (int j = 0; j < n; ++j) {
    const cplx w = unit(kTwoPi * (j + 0.29) / n);
    const cplx z = curve.psi(w);
    const double hv = pack.h_unchecked(z);
    const double e = 1.0 / (std::norm(pack.delta_e_w(w)) * hv) - 1.0;
    const double i = std::norm(pack.delta_i(z)) / hv - 1.0;
    if (std::abs(e) > tol || std::abs(i) > tol)
      throw Error(ErrorKind::Resolution,
                  "Szego pack fails the boundary modulus identities; check the declared rho or weight analyticity",
                  std::max(std::abs(e), std::abs(i)));
  }
}

}  // namespace detail

/// Delta_e(z) = D_e(phi(z); h o psi), Delta_i(z) = D_i(phi_int(z); h o delta).
/// The exterior data are the Laurent coefficients of log H on |w| = s with
/// rho < s < 1, which keeps the continuation to Omega_rho well conditioned.
inline SzegoPack build_szego_pack_generic(const InteriorMap& map, const WeightSpec& weight) {
  if (weight.kind != WeightSpec::Kind::GenericAnalytic)
    throw Error(ErrorKind::Precondition, "build_szego_pack_generic: weight is not generic");
  const Curve& curve = map.curve();
  for (int j = 0; j < 256; ++j) {
    if (!(std::norm(weight.V(curve.psi(unit(node_angle(j, 256))))) > 0.0))
      throw Error(ErrorKind::Domain, "generic weight: h must be positive on L_1");
  }
  const double rho = weight.rho ? *weight.rho : detail::estimate_exterior_radius(curve, weight.V);
  if (!(rho >= curve.rho_hat() && rho < 1.0))
    throw Error(ErrorKind::Configuration, "generic weight: rho must satisfy rho_hat <= rho < 1");
  const double s = rho + 0.25 * (1.0 - rho);
  SzegoPack::Generic g = detail::exterior_data_on_circle(curve, weight.V, s);
  if (weight.rho) {
    const double decay = detail::coefficient_decay_radius(g.ext, s);
    if (decay > rho * 1.02 + 1e-3)
      throw Error(ErrorKind::Configuration,
                  "generic weight: declared rho is below the analyticity radius of Delta_e suggested by its Laurent data",
                  decay);
  }
  const LaurentSeries v = weight.V;
  g.interior = detail::interior_szego(map, [&](cplx z) { return std::norm(v(z)); });
  SzegoPack pack(map, weight, rho, std::move(g));
  detail::verify_boundary_moduli(pack, 1e-9);
  return pack;
}

inline SingularGeometry singular_geometry(const InteriorMap& map, const WeightSpec& weight) {
  const Curve& curve = map.curve();
  SingularGeometry geo;
  const auto& pts = weight.singularities;
  if (pts.empty()) throw Error(ErrorKind::Precondition, "singular weight: at least one singularity required");
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (is_nonpositive_integer(pts[k].lambda))
      throw Error(ErrorKind::Configuration, "singular weight: lambda_k must not be 0, -1, -2, ...");
    if (k > 0 && pts[k].lambda > pts[k - 1].lambda)
      throw Error(ErrorKind::Configuration, "singular weight: lambda_k must be sorted decreasingly");
    for (std::size_t j = 0; j < k; ++j)
      if (std::abs(pts[k].a - pts[j].a) < 1e-12) throw Error(ErrorKind::Configuration, "singular weight: a_k must be distinct");
  }
  for (const auto& p : pts) {
    const cplx w = curve.phi(p.a);
    geo.rho_k.push_back(w);
    double th = std::arg(w);
    if (th < 0) th += kTwoPi;
    geo.theta.push_back(th);
  }
  geo.rho = std::abs(geo.rho_k[0]);
  for (const auto& w : geo.rho_k)
    if (std::abs(std::abs(w) - geo.rho) > 1e-10)
      throw Error(ErrorKind::Configuration, "singular weight: all a_k must lie on a common level curve L_rho");
  if (!(geo.rho > curve.rho_hat() && geo.rho < 1.0))
    throw Error(ErrorKind::Configuration, "singular weight: rho must satisfy rho_hat < rho < 1");
  geo.sigma = weight.sigma ? *weight.sigma : 0.5 * (curve.rho_hat() + geo.rho);
  if (!(geo.sigma > curve.rho_hat() && geo.sigma < geo.rho))
    throw Error(ErrorKind::Configuration, "singular weight: sigma must satisfy rho_hat < sigma < rho");
  geo.u = 1;
  while (geo.u < static_cast<int>(pts.size()) && pts[geo.u].lambda == pts[0].lambda) ++geo.u;
  for (const auto& w : geo.rho_k) geo.sigma_k.push_back(geo.sigma * w / geo.rho);
  for (const auto& p : pts) geo.phi_int_a.push_back(map.value(p.a));
  // (psi(w) - psi(p)) / (c1 (w - p)) = 1 - sum_m (e_m / c1) w^{-m}
  const auto& cneg = curve.spec().cneg;
  const int jmax = static_cast<int>(cneg.size());
  for (const auto& p : geo.rho_k) {
    std::vector<cplx> zeros;
    if (jmax > 0) {
      std::vector<cplx> poly(jmax + 1, cplx{0.0});
      poly[jmax] = 1.0;
      for (int m = 1; m <= jmax; ++m) {
        cplx e = 0.0;
        for (int j = m - 1; j < jmax; ++j) e += cneg[j] * std::pow(p, -(j + 2 - m));
        poly[jmax - m] -= e / curve.c1();
      }
      zeros = monic_roots(poly);
    }
    geo.q_zeros.push_back(std::move(zeros));
  }
  return geo;
}

/// Closed forms
///   Delta_e(z) = omega(z) prod_k (phi(z)/(z - a_k))^{lambda_k},
///   Delta_i(z) = Delta_i(z; |omega|^{-2}) prod_k ((z - a_k)(1 - conj(phi_int(a_k)) phi_int(z)) / (phi_int(z) - phi_int(a_k)))^{lambda_k}
/// with the power branches positive at infinity (exterior) and Delta_i(z0) > 0.
inline SzegoPack build_szego_pack_singular(const InteriorMap& map, const WeightSpec& weight) {
  if (weight.kind != WeightSpec::Kind::AlgebraicSingular)
    throw Error(ErrorKind::Precondition, "build_szego_pack_singular: weight is not singular");
  const Curve& curve = map.curve();
  if (weight.omega.degree() > 0)
    throw Error(ErrorKind::Configuration, "singular weight: omega must be analytic at infinity (no positive powers)");
  if (!(weight.omega.at_infinity().real() > 0.0) || std::abs(weight.omega.at_infinity().imag()) > 1e-14)
    throw Error(ErrorKind::Configuration, "singular weight: omega must be positive at infinity");
  SzegoPack::Singular s;
  s.omega = weight.omega;
  s.pts = weight.singularities;
  s.geo = singular_geometry(map, weight);
  for (int j = 0; j < 256; ++j)
    if (std::abs(weight.omega(curve.psi(unit(node_angle(j, 256))))) == 0.0)
      throw Error(ErrorKind::Configuration, "singular weight: omega vanishes on L_1");
  for (const auto& p : s.pts)
    if (std::abs(weight.omega(p.a)) == 0.0) throw Error(ErrorKind::Configuration, "singular weight: omega vanishes at a_k");
  const LaurentSeries om = weight.omega;
  s.omega_interior = detail::interior_szego(map, [&](cplx z) { return 1.0 / std::norm(om(z)); });
  for (const auto& p : s.pts) {
    const cplx sd = map.sqrt_derivative(p.a);
    s.log_dk_anchor.push_back(2.0 * std::log(sd));
  }
  SzegoPack pack(map, weight, s.geo.rho, s);
  // normalise Delta_i(z0) > 0
  const cplx d0 = pack.delta_i(map.center());
  auto data = s;
  data.interior_phase = std::abs(d0) / d0;
  SzegoPack out(map, weight, s.geo.rho, std::move(data));
  detail::verify_boundary_moduli(out, 1e-9);
  return out;
}

inline SzegoPack build_szego_pack(const InteriorMap& map, const WeightSpec& weight) {
  return weight.kind == WeightSpec::Kind::GenericAnalytic ? build_szego_pack_generic(map, weight)
                                                          : build_szego_pack_singular(map, weight);
}

inline cplx continue_delta_i_inverse(const SzegoPack& pack, cplx z) {
  const cplx w = pack.curve().phi(z);
  if (!(std::abs(w) > 1.0)) throw Error(ErrorKind::Domain, "continue_delta_i_inverse: z must lie outside L_1");
  return pack.inv_delta_i(z, w);
}

inline double h_eval(const SzegoPack& pack, cplx z) { return pack.h(z); }

}  // namespace curveortho
