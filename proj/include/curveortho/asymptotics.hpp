#pragma once

// Main terms of the strong asymptotics: exterior Szego formula, the interior
// contour representation, and the algebraic-singularity formulas together with
// the model integral they rest on.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "core.hpp"
#include "curve_geometry.hpp"
#include "quadrature.hpp"
#include "weights_szego.hpp"

namespace curveortho {

/// Gamma(a+1) / (Gamma(b+1) Gamma(a-b+1)) through log-gamma with the sign kept
/// separately. A pole in the denominator gives 0.
inline double binom_general(double a, double b) {
  if (is_nonpositive_integer(a + 1.0)) throw Error(ErrorKind::Domain, "binom_general: Gamma(a+1) has a pole", a);
  if (is_nonpositive_integer(b + 1.0) || is_nonpositive_integer(a - b + 1.0)) return 0.0;
  // exact integers stay exact while they fit
  if (a == std::floor(a) && b == std::floor(b) && a >= 0 && b >= 0 && a <= 60) {
    double r = 1.0;
    for (int k = 1; k <= static_cast<int>(b); ++k) r = r * (a - b + k) / k;
    return r;
  }
  auto sign = [](double x) { return x > 0.0 || static_cast<long long>(std::floor(x)) % 2 == 0 ? 1.0 : -1.0; };
  const double lg = std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
  return sign(a + 1.0) * sign(b + 1.0) * sign(a - b + 1.0) * std::exp(lg);
}

/// c1^{n+1/2} / Delta_e(infinity): turns the normalised right-hand sides into monic values.
inline double monic_factor(const SzegoPack& pack, int n) {
  return std::pow(pack.curve().c1(), n + 0.5) / pack.delta_e_inf();
}

// ---------------------------------------------------------------------------
// constants of the singular family

struct SingularityData {
  struct Point {
    cplx a;
    double lambda = 0.0;
    double theta = 0.0;
    cplx rho_k;
    cplx alpha;
    cplx alpha_limit;   // audit value from the limit path
    cplx delta_i_a;
    cplx phi_prime;     // phi'(a_k) = 1/psi'(rho_k)
  };
  std::vector<Point> points;
  double rho = 0.0;
  double sigma = 0.0;
  int u = 1;
};

namespace detail {

// Neville extrapolation to x = 0.
inline cplx extrapolate_to_zero(const std::vector<double>& x, std::vector<cplx> y) {
  const std::size_t m = x.size();
  for (std::size_t k = 1; k < m; ++k)
    for (std::size_t i = m - 1; i >= k; --i) {
      y[i] = (x[i] * y[i - 1] - x[i - k] * y[i]) / (x[i] - x[i - k]);
      if (i == k) break;
    }
  return y[m - 1];
}

// log of phi(z)/(z - a) at z = psi(rho_k t), continued along the ray from t = 1e3
// inward; the start is the principal value, which is the branch positive at infinity.
inline cplx tracked_log_ratio(const Curve& curve, cplx a, cplx rk, double t_end) {
  auto g = [&](double t) {
    const cplx w = rk * t;
    return w / (curve.psi(w) - a);
  };
  const int steps = 4000;
  const double l0 = std::log(1e3), l1 = std::log(t_end);
  cplx prev = g(1e3);
  cplx acc = std::log(prev);
  for (int j = 1; j <= steps; ++j) {
    const double t = std::exp(l0 + (l1 - l0) * j / steps);
    const cplx cur = g(t);
    const cplx step = std::log(cur / prev);
    if (std::abs(step.imag()) > kPi / 4) throw Error(ErrorKind::Resolution, "alpha audit: argument tracking failed");
    acc += step;
    prev = cur;
  }
  return acc;
}

}  // namespace detail

/// alpha_k = [phi'(a_k)]^{lambda_k - 1/2} omega(a_k) prod_{j != k} (phi(a_k)/(a_k - a_j))^{lambda_j}.
/// The power of phi' uses exp(lambda_k B_k - L_k/2)^{-1}, where B_k is the log of
/// psi'(rho_k) carried by the Delta_e branch and L_k that of sqrt(psi'); this is
/// the branch the local model integral produces. The bracket limit is recomputed
/// by Richardson extrapolation along the outward ray as an audit.
inline SingularityData alpha_constants(const SzegoPack& pack) {
  if (!pack.singular()) throw Error(ErrorKind::Precondition, "alpha_constants: weight is not of the singular family");
  const auto& s = pack.singular_data();
  const Curve& curve = pack.curve();
  SingularityData out;
  out.rho = s.geo.rho;
  out.sigma = s.geo.sigma;
  out.u = s.geo.u;
  for (std::size_t k = 0; k < s.pts.size(); ++k) {
    SingularityData::Point p;
    p.a = s.pts[k].a;
    p.lambda = s.pts[k].lambda;
    p.theta = s.geo.theta[k];
    p.rho_k = s.geo.rho_k[k];
    const cplx rk = p.rho_k;

    cplx limit = s.omega(p.a);
    for (std::size_t j = 0; j < s.pts.size(); ++j)
      if (j != k) limit *= pack.singular_factor(j, rk);

    cplx bk = std::log(curve.c1());
    for (const auto& g : s.geo.q_zeros[k]) bk += std::log(1.0 - g / rk);
    const cplx lk = curve.log_dpsi(rk);
    p.alpha = std::exp(0.5 * lk - p.lambda * bk) * limit;
    p.phi_prime = std::exp(-lk);

    // audit: (phi(z)/(z - a_k))^{-lambda_k} Delta_e(z) along w = rho_k (1 + eps)
    std::vector<double> eps;
    std::vector<cplx> vals;
    for (int j = 1; j <= 8; ++j) {
      const double e = 0.03 * j;
      const cplx w = rk * (1.0 + e);
      const cplx lg = detail::tracked_log_ratio(curve, p.a, rk, 1.0 + e);
      eps.push_back(e);
      vals.push_back(std::exp(-p.lambda * lg) * pack.delta_e_w(w));
    }
    p.alpha_limit = detail::extrapolate_to_zero(eps, vals);
    if (std::abs(p.alpha_limit - limit) > 1e-6 * std::abs(limit))
      throw Error(ErrorKind::Resolution, "alpha_constants: limit path disagrees with the closed form (branch anchor)",
                  std::abs(p.alpha_limit - limit) / std::abs(limit));
    p.alpha_limit *= std::exp(0.5 * lk - p.lambda * bk);
    p.delta_i_a = pack.delta_i(p.a);
    out.points.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Szego-type main terms

/// Delta_e(z) sqrt(phi'(z)) phi(z)^n / (Delta_e(inf) phi'(inf)^{n+1/2}) for |phi(z)| >= r1 > rho.
inline cplx szego_exterior_formula(const SzegoPack& pack, int n, cplx z, double r1 = -1.0) {
  const Curve& curve = pack.curve();
  const auto w = curve.try_phi(z);
  if (!w) throw Error(ErrorKind::Domain, "szego_exterior_formula: phi(z) undefined");
  const double m = std::abs(*w);
  if (r1 < 0.0) r1 = m;
  if (!(r1 > pack.rho()) || m < r1 * (1.0 - 1e-14))
    throw Error(ErrorKind::Domain, "szego_exterior_formula: need |phi(z)| >= r1 > rho", m);
  return pack.delta_e_w(*w) / curve.sqrt_dpsi(*w) * std::pow(*w, n) * monic_factor(pack, n);
}

/// Delta_e(inf) phi'(inf)^{n+1/2}.
inline double gamma_asymptotic(const SzegoPack& pack, int n) {
  return pack.delta_e_inf() * std::pow(pack.curve().c1(), -(n + 0.5));
}

/// Monic value of (1/Delta_i(z)) (1/2 pi i) int_{L_1} Delta_e Delta_i W(zeta, z) sqrt(phi'(zeta)) phi(zeta)^n dzeta,
/// trapezoid rule in the w-plane with node doubling.
inline cplx interior_integral_rep(const SzegoPack& pack, int n, cplx z, int N = 256, int N_max = 1 << 16) {
  const Curve& curve = pack.curve();
  const InteriorMap& map = pack.interior_map();
  if (auto w = curve.try_phi(z); w && std::abs(*w) >= 1.0)
    throw Error(ErrorKind::Domain, "interior_integral_rep: z must lie inside L_1");
  const auto zp = map.at(z);
  double mass = 0.0;
  auto rule = [&](int m) {
    cplx acc = 0.0;
    mass = 0.0;
    for (int j = 0; j < m; ++j) {
      const cplx w = unit(node_angle(j, m));
      const cplx zeta = curve.psi(w);
      const cplx prod = pack.delta_e_w(w) * pack.delta_i(zeta);
      const cplx f = prod * InteriorMap::kernel(map.at(zeta, w), zp) * curve.sqrt_dpsi(w) * std::pow(w, n) * w;
      acc += f;
      mass += std::abs(f);
    }
    mass /= m;
    return acc / static_cast<double>(m);
  };
  cplx prev = rule(N);
  for (int m = 2 * N; m <= N_max; m *= 2) {
    const cplx cur = rule(m);
    if (std::abs(cur - prev) <= 1e-13 * std::abs(cur) + 1e-14 * mass) return cur / pack.delta_i(z) * monic_factor(pack, n);
    prev = cur;
  }
  throw Error(ErrorKind::Resolution, "interior_integral_rep: quadrature did not converge under doubling");
}

// ---------------------------------------------------------------------------
// algebraic singularities

enum class SingularRegion { Outer, Inner };  // G_1 cap Sigma_sigma, or G_sigma

struct SingularTerms {
  cplx region_term;  // Delta_e sqrt(phi') phi^n part (0 in G_sigma)
  cplx main_term;    // binom(n, lambda_1 - 1)/Delta_i(z) sum_{k<=u} ... part
  cplx value;        // sum, monic normalisation
  double scale = 0.0;  // |binom(n, lambda_1 - 1)| rho^n in monic normalisation
  SingularRegion region = SingularRegion::Inner;
};

/// Monic main terms of P_n(z) for z in G_1 away from the cut system.
inline SingularTerms thm3_interior(const SzegoPack& pack, const SingularityData& sd, int n, cplx z) {
  if (!pack.singular()) throw Error(ErrorKind::Precondition, "thm3_interior: at least one singularity required");
  const auto& s = pack.singular_data();
  const Curve& curve = pack.curve();
  const double guard = 0.02 * sd.rho;
  const double nf = monic_factor(pack, n);
  SingularTerms out;

  const auto w = curve.try_phi(z);
  if (w && std::abs(*w) >= 1.0) throw Error(ErrorKind::Domain, "thm3_interior: z must lie inside L_1");
  if (w && std::abs(std::abs(*w) - sd.sigma) < guard) throw Error(ErrorKind::CutProximity, "thm3_interior: z too close to L_sigma");
  if (w && std::abs(*w) > sd.sigma) {
    pack.check_cut(s, *w);
    out.region = SingularRegion::Outer;
    out.region_term = pack.delta_e_w(*w) / curve.sqrt_dpsi(*w) * std::pow(*w, n) * nf;
  }
  const double b = binom_general(n, sd.points[0].lambda - 1.0);
  cplx acc = 0.0;
  for (int k = 0; k < sd.u; ++k) {
    const auto& p = sd.points[k];
    acc += p.alpha * p.delta_i_a * kernel_W(pack.interior_map(), p.a, z) * std::pow(p.rho_k, n + 1);
  }
  out.main_term = b * acc / pack.delta_i(z) * nf;
  out.value = out.region_term + out.main_term;
  out.scale = std::abs(b) * std::pow(sd.rho, n) * nf;
  return out;
}

/// Monic main terms of P_n(a_j) (j is 0-based).
inline cplx thm3_at_singularity(const SzegoPack& pack, const SingularityData& sd, int n, int j) {
  if (j < 0 || j >= static_cast<int>(sd.points.size())) throw Error(ErrorKind::Index, "thm3_at_singularity: j out of range", j);
  const auto& pj = sd.points[j];
  cplx v = binom_general(n, pj.lambda) * pj.alpha * pj.phi_prime * std::pow(pj.rho_k, n);
  cplx acc = 0.0;
  for (int k = 0; k < sd.u; ++k) {
    if (k == j) continue;
    const auto& p = sd.points[k];
    acc += p.alpha * p.delta_i_a * kernel_W(pack.interior_map(), p.a, pj.a) * std::pow(p.rho_k, n + 1);
  }
  v += binom_general(n, sd.points[0].lambda - 1.0) * acc / pj.delta_i_a;
  return v * monic_factor(pack, n);
}

/// Rate of r_n from the remark following the singular asymptotics (1 for geometric decay).
inline double thm3_modeled_rate(const SingularityData& sd, int n) {
  const double l1 = sd.points[0].lambda;
  const bool all = sd.u == static_cast<int>(sd.points.size());
  if (l1 == 1.0) return all ? 0.0 : std::pow(n, sd.points[sd.u].lambda - l1);
  if (all) return 1.0 / n;
  return std::pow(n, -std::min(1.0, l1 - sd.points[sd.u].lambda));
}

// ---------------------------------------------------------------------------
// model integral (1/2 pi i) int_{|t - rho| = delta} (t - rho)^{-beta} t^n v(t) dt

enum class PropositionMode { Quadrature, Asymptotic };

namespace detail {

template <typename T>
std::complex<T> proposition_quadrature(const std::function<std::complex<T>(std::complex<T>)>& v, T beta, T rho, T delta, int n) {
  using C = std::complex<T>;
  const T pi = std::acos(T(-1));
  T mass = 0;
  auto rule = [&](int m) {
    const auto g = quad::gauss_legendre_t<T>(m);
    C acc = 0;
    mass = 0;
    for (int j = 0; j < m; ++j) {
      const T th = pi * g.nodes[j];
      const C e(std::cos(th), std::sin(th));
      const C ph(std::cos((1 - beta) * th), std::sin((1 - beta) * th));
      const C t = rho + delta * e;
      const C f = g.weights[j] * std::pow(delta, 1 - beta) * ph * std::pow(t, n) * v(t);
      acc += f;
      mass += std::abs(f);
    }
    mass /= 2;
    return acc / T(2);  // (1/2 pi) * pi from the change of variable
  };
  const T eps = std::numeric_limits<T>::epsilon();
  C prev = rule(32);
  for (int m = 64; m <= 8192; m *= 2) {
    const C cur = rule(m);
    if (std::abs(cur - prev) <= 100 * eps * (std::abs(cur) + mass)) return cur;
    prev = cur;
  }
  throw Error(ErrorKind::Resolution, "proposition_I: quadrature did not converge");
}

inline void proposition_preconditions(double beta, double rho, double delta, int n) {
  if (is_nonpositive_integer(beta)) throw Error(ErrorKind::Domain, "proposition_I: beta must not be 0, -1, -2, ...", beta);
  if (!(rho > 0.0) || !(delta > 0.0)) throw Error(ErrorKind::Domain, "proposition_I: need rho > 0 and delta > 0");
  if (n < 0) throw Error(ErrorKind::Precondition, "proposition_I: n must be >= 0");
}

}  // namespace detail

/// Quadrature mode parametrises the circle by t = rho + delta e^{i theta},
/// theta in (-pi, pi), so the cut (-inf, rho] is met only at the endpoints;
/// Gauss-Legendre on that open interval converges geometrically.
/// The sum cancels heavily for large n (|t|^n peaks at rho + delta), so this
/// overload carries v in long double and sums in long double.
inline cplx proposition_I(const std::function<cld(cld)>& v, double beta, double rho, double delta, int n, PropositionMode mode) {
  detail::proposition_preconditions(beta, rho, delta, n);
  if (mode == PropositionMode::Asymptotic) {
    const cld vr = v(rho);
    return binom_general(n, beta - 1.0) * cplx(static_cast<double>(vr.real()), static_cast<double>(vr.imag())) *
           std::pow(rho, n - beta + 1.0);
  }
  const cld q = detail::proposition_quadrature<long double>(v, beta, rho, delta, n);
  return {static_cast<double>(q.real()), static_cast<double>(q.imag())};
}

/// Double-valued v: the samples themselves limit accuracy to about eps times the integrand mass.
inline cplx proposition_I(const std::function<cplx(cplx)>& v, double beta, double rho, double delta, int n, PropositionMode mode) {
  return proposition_I(
      [&v](cld t) {
        const cplx r = v(cplx(static_cast<double>(t.real()), static_cast<double>(t.imag())));
        return cld(r.real(), r.imag());
      },
      beta, rho, delta, n, mode);
}

}  // namespace curveortho
