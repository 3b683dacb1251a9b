#pragma once

// Ground truth for P_n and gamma_n straight from the curve inner product,
// independent of the Szego/transform machinery.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "core.hpp"
#include "curve_geometry.hpp"
#include "weights_szego.hpp"

namespace curveortho {

using WeightFn = std::function<double(cplx)>;

inline WeightFn weight_function(const WeightSpec& spec) {
  if (spec.kind == WeightSpec::Kind::GenericAnalytic) {
    return [v = spec.V](cplx z) { return std::norm(v(z)); };
  }
  return [om = spec.omega, pts = spec.singularities](cplx z) {
    double h = 1.0 / std::norm(om(z));
    for (const auto& p : pts) h *= std::pow(std::abs(z - p.a), 2.0 * p.lambda);
    return h;
  };
}

struct PolyCoeffs {
  int n = 0;
  std::vector<cplx> coeffs;  // power basis in z, coeffs[n] = 1
  double norm = 0.0;
  double gamma = 0.0;
  // the same polynomial as c1^n Q((z - center)/c1), Q monic; evaluation goes through Q
  cplx center = 0.0;
  double scale = 1.0;
  std::vector<cplx> scaled;
  double gram_condition = 1.0;
  int nodes = 0;
  std::vector<std::string> warnings;

  cplx operator()(cplx z) const {
    if (scaled.empty()) return horner(coeffs, z);
    return std::pow(scale, n) * horner(scaled, (z - center) / scale);
  }
};

/// Trapezoid nodes on L_1 with the arclength weight |psi'| h / N.
struct CurveQuadrature {
  std::vector<cplx> z;
  std::vector<double> weight;
};

inline CurveQuadrature curve_quadrature(const Curve& curve, const WeightFn& h, int N) {
  CurveQuadrature q;
  q.z.resize(N);
  q.weight.resize(N);
  for (int j = 0; j < N; ++j) {
    const cplx w = unit(node_angle(j, N));
    q.z[j] = curve.psi(w);
    const double hv = h(q.z[j]);
    if (!(hv > 0.0)) throw Error(ErrorKind::Domain, "oracle: weight must be positive on L_1", hv);
    q.weight[j] = hv * std::abs(curve.dpsi(w)) / N;
  }
  return q;
}

inline cplx inner_product_at(const CurveQuadrature& q, const std::function<cplx(cplx)>& p, const std::function<cplx(cplx)>& s) {
  cplx acc = 0.0;
  for (std::size_t j = 0; j < q.z.size(); ++j) acc += p(q.z[j]) * std::conj(s(q.z[j])) * q.weight[j];
  return acc;
}

/// <p, q>_h with N-doubling until two consecutive values agree to 1e-13 relative.
inline cplx inner_product(const std::function<cplx(cplx)>& p, const std::function<cplx(cplx)>& s, const Curve& curve,
                          const WeightFn& h, int N = 512) {
  cplx prev = inner_product_at(curve_quadrature(curve, h, N), p, s);
  for (int n = 2 * N; n <= (1 << 18); n *= 2) {
    const cplx cur = inner_product_at(curve_quadrature(curve, h, n), p, s);
    const double scale = std::max(std::abs(cur), std::sqrt(std::abs(inner_product_at(curve_quadrature(curve, h, n), p, p) *
                                                                    inner_product_at(curve_quadrature(curve, h, n), s, s))));
    if (std::abs(cur - prev) <= 1e-13 * std::max(scale, 1e-300)) return cur;
    prev = cur;
  }
  throw Error(ErrorKind::Resolution, "inner_product: quadrature did not converge under doubling");
}

inline cplx inner_product(const PolyCoeffs& p, const PolyCoeffs& s, const Curve& curve, const WeightFn& h, int N = 512) {
  return inner_product([&](cplx z) { return p(z); }, [&](cplx z) { return s(z); }, curve, h, N);
}

namespace detail {

inline PolyCoeffs monic_orthogonal_at(const Curve& curve, const WeightFn& h, int n, int N) {
  const CurveQuadrature q = curve_quadrature(curve, h, N);
  const cplx center = curve.spec().c0;
  const double scale = curve.c1();
  PolyCoeffs out;
  out.n = n;
  out.center = center;
  out.scale = scale;
  out.nodes = N;
  out.scaled.assign(n + 1, cplx{0.0});
  out.scaled[n] = 1.0;
  double resid2 = 0.0;
  if (n == 0) {
    for (double w : q.weight) resid2 += w;
  } else {
    // minimise || sqrt(w) (u^n + sum_{k<n} c_k u^k) ||_2 by Householder QR
    Eigen::MatrixXcd a(N, n);
    Eigen::VectorXcd b(N);
    for (int j = 0; j < N; ++j) {
      const double sw = std::sqrt(q.weight[j]);
      const cplx u = (q.z[j] - center) / scale;
      cplx p = 1.0;
      for (int k = 0; k < n; ++k) {
        a(j, k) = sw * p;
        p *= u;
      }
      b(j) = -sw * p;
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    const Eigen::MatrixXcd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(n - 1);
    out.gram_condition = cond * cond;
    if (!(sv(n - 1) > 0.0) || cond > 1e13)
      throw Error(ErrorKind::Conditioning, "monic_orthogonal: Gram matrix numerically singular; lower n or rescale the curve",
                  out.gram_condition);
    if (out.gram_condition > 1e12) out.warnings.push_back("Gram condition estimate exceeds 1e12");
    const Eigen::VectorXcd c = qr.solve(b);
    for (int k = 0; k < n; ++k) out.scaled[k] = c(k);
    resid2 = (a * c - b).squaredNorm();
  }
  out.norm = std::pow(scale, n) * std::sqrt(resid2);
  out.gamma = 1.0 / out.norm;
  // power basis: c1^n Q((z - center)/c1)
  out.coeffs.assign(n + 1, cplx{0.0});
  std::vector<cplx> binom_row{1.0};
  for (int k = 0; k <= n; ++k) {
    // (z - center)^k = sum_j binom(k, j) z^j (-center)^{k-j}
    if (k > 0) {
      std::vector<cplx> next(k + 1, cplx{0.0});
      for (int j = 0; j < k; ++j) {
        next[j + 1] += binom_row[j];
        next[j] += -center * binom_row[j];
      }
      binom_row = std::move(next);
    }
    const cplx f = out.scaled[k] * std::pow(scale, n - k);
    for (int j = 0; j <= k; ++j) out.coeffs[j] += f * binom_row[j];
  }
  out.coeffs[n] = 1.0;
  return out;
}

}  // namespace detail

/// Monic minimiser of ||P||_h over degree-n monic polynomials. Doubles the
/// node count until the coefficients are stable to 1e-10.
inline PolyCoeffs monic_orthogonal(const Curve& curve, const WeightFn& h, int n, int N = 0) {
  if (n < 0) throw Error(ErrorKind::Precondition, "monic_orthogonal: n must be >= 0");
  int nodes = N > 0 ? N : std::max(512, 16 * n);
  PolyCoeffs prev = detail::monic_orthogonal_at(curve, h, n, nodes);
  for (int it = 0; it < 6; ++it) {
    nodes *= 2;
    PolyCoeffs cur = detail::monic_orthogonal_at(curve, h, n, nodes);
    double diff = 0.0, size = 0.0;
    for (int k = 0; k <= n; ++k) {
      diff = std::max(diff, std::abs(cur.scaled[k] - prev.scaled[k]));
      size = std::max(size, std::abs(cur.scaled[k]));
    }
    if (diff <= 1e-10 * size && std::abs(cur.norm - prev.norm) <= 1e-12 * cur.norm) return cur;
    prev = std::move(cur);
  }
  throw Error(ErrorKind::Resolution, "monic_orthogonal: coefficients not stable under node doubling");
}

inline PolyCoeffs monic_orthogonal(const Curve& curve, const WeightSpec& weight, int n, int N = 0) {
  return monic_orthogonal(curve, weight_function(weight), n, N);
}

/// p_n(z) = gamma_n P_n(z).
inline cplx orthonormal_eval(const PolyCoeffs& p, cplx z) { return p.gamma * p(z); }

/// Orthonormal polynomials p_0..p_nmax by Arnoldi on the quadrature nodes
/// (Stieltjes procedure with re-orthogonalisation). Evaluation runs the
/// Hessenberg recurrence at the target. Inside L_1 the monic values are tiny
/// against the O(1) terms that cancel to produce them, so the whole
/// construction (nodes, weight, recurrence) runs in the scalar type T;
/// long double buys three digits over the power-basis oracle there.
template <typename T>
class BasicOrthogonalBasis {
 public:
  using C = std::complex<T>;
  using Weight = std::function<T(C)>;

  int max_degree() const { return static_cast<int>(gamma_.size()) - 1; }
  int nodes() const { return nodes_; }
  double gamma(int n) const { return static_cast<double>(gamma_.at(n)); }
  T gamma_ext(int n) const { return gamma_.at(n); }

  /// p_0(z), ..., p_n(z)
  std::vector<C> orthonormal(C z, int n) const {
    if (n < 0 || n > max_degree()) throw Error(ErrorKind::Index, "orthogonal basis: degree out of range", n);
    const C u = (z - center_) / scale_;
    std::vector<C> q(n + 1);
    q[0] = q0_;
    for (int k = 0; k < n; ++k) {
      C v = u * q[k];
      for (int j = 0; j <= k; ++j) v -= H_(j, k) * q[j];
      q[k + 1] = v / H_(k + 1, k);
    }
    return q;
  }

  /// Zeros of P_n: eigenvalues of the leading n x n Hessenberg block, mapped back to z.
  std::vector<cplx> zeros(int n) const {
    if (n < 1 || n > max_degree()) throw Error(ErrorKind::Index, "orthogonal basis: degree out of range", n);
    Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic> h = H_.topLeftCorner(n, n);
    Eigen::ComplexEigenSolver<Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>> es(h, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::IterationFailure, "orthogonal basis: eigen-solver failed");
    std::vector<cplx> out;
    for (int k = 0; k < n; ++k) {
      const C z = center_ + scale_ * es.eigenvalues()(k);
      out.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    }
    return out;
  }

  /// Monic P_n(z).
  cplx monic(cplx z, int n) const {
    const C v = orthonormal(C(z.real(), z.imag()), n)[n] / gamma_[n];
    return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
  }

  static BasicOrthogonalBasis build(const CurveSpec& curve, const Weight& h, int nmax, int N) {
    if (nmax < 0) throw Error(ErrorKind::Precondition, "orthogonal basis: nmax must be >= 0");
    using Mat = Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
    const T pi = std::acos(T(-1));
    const C c0(curve.c0.real(), curve.c0.imag());
    BasicOrthogonalBasis b;
    b.nodes_ = N;
    b.center_ = c0;
    b.scale_ = curve.c1;
    b.H_ = Mat::Zero(nmax + 1, nmax + 1);
    Vec sw(N), u(N);
    for (int j = 0; j < N; ++j) {
      const T th = 2 * pi * T(j) / T(N);
      const C w(std::cos(th), std::sin(th));
      C z = T(curve.c1) * w + c0, dz = T(curve.c1);
      C wp = T(1) / w;
      for (std::size_t k = 0; k < curve.cneg.size(); ++k) {
        const C ck(curve.cneg[k].real(), curve.cneg[k].imag());
        z += ck * wp;
        dz -= T(k + 1) * ck * wp / w;
        wp /= w;
      }
      const T hv = h(z);
      if (!(hv > 0)) throw Error(ErrorKind::Domain, "oracle: weight must be positive on L_1", static_cast<double>(hv));
      sw(j) = std::sqrt(hv * std::abs(dz) / T(N));
      u(j) = (z - c0) / T(curve.c1);
    }
    Mat Q(N, nmax + 1);
    const T n0 = sw.norm();
    Q.col(0) = sw / n0;
    b.q0_ = T(1) / n0;
    b.gamma_.assign(nmax + 1, T(0));
    b.gamma_[0] = T(1) / n0;
    for (int k = 0; k < nmax; ++k) {
      Vec v = u.cwiseProduct(Q.col(k));
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const C c = Q.col(j).dot(v);
          b.H_(j, k) += c;
          v -= c * Q.col(j);
        }
      const T nv = v.norm();
      if (!(nv > T(1e-300))) throw Error(ErrorKind::Conditioning, "orthogonal basis: Krylov space exhausted; raise N");
      b.H_(k + 1, k) = nv;
      Q.col(k + 1) = v / nv;
      b.gamma_[k + 1] = b.gamma_[k] / nv;
    }
    for (int k = 0; k <= nmax; ++k) b.gamma_[k] /= std::pow(T(curve.c1), k);
    return b;
  }

 private:
  Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic> H_;
  std::vector<T> gamma_;
  C q0_ = T(1);
  C center_ = T(0);
  T scale_ = 1;
  int nodes_ = 0;
};

using OrthogonalBasis = BasicOrthogonalBasis<long double>;

/// Weight of a WeightSpec evaluated in T.
template <typename T>
std::function<T(std::complex<T>)> weight_function_t(const WeightSpec& spec) {
  using C = std::complex<T>;
  auto laurent = [](const LaurentSeries& s, C z) {
    C acc = 0;
    for (std::size_t k = s.pos.size(); k-- > 0;) acc = acc * z + C(s.pos[k].real(), s.pos[k].imag());
    C neg = 0;
    for (std::size_t k = s.neg.size(); k-- > 0;) neg = (neg + C(s.neg[k].real(), s.neg[k].imag())) / z;
    return acc + neg;
  };
  if (spec.kind == WeightSpec::Kind::GenericAnalytic) return [=](C z) { return std::norm(laurent(spec.V, z)); };
  return [=](C z) {
    T h = T(1) / std::norm(laurent(spec.omega, z));
    for (const auto& p : spec.singularities) h *= std::pow(std::abs(z - C(p.a.real(), p.a.imag())), T(2) * T(p.lambda));
    return h;
  };
}

/// Basis up to nmax with the node count doubled until gamma_nmax is stable to 1e-13.
inline OrthogonalBasis orthogonal_basis(const Curve& curve, const WeightSpec& weight, int nmax, int N = 0) {
  const auto h = weight_function_t<long double>(weight);
  int nodes = N > 0 ? N : std::max(512, 16 * nmax);
  OrthogonalBasis prev = OrthogonalBasis::build(curve.spec(), h, nmax, nodes);
  for (int it = 0; it < 6; ++it) {
    nodes *= 2;
    OrthogonalBasis cur = OrthogonalBasis::build(curve.spec(), h, nmax, nodes);
    if (std::abs(cur.gamma(nmax) / prev.gamma(nmax) - 1.0) <= 1e-13) return cur;
    prev = std::move(cur);
  }
  throw Error(ErrorKind::Resolution, "orthogonal_basis: leading coefficients not stable under node doubling");
}

}  // namespace curveortho
