#pragma once

// Recursive integral transforms f_n^(k), g_n^(k) and the summed expansions of
// P_n and gamma_n built from them.

#include <algorithm>
#include <functional>
#include <mutex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "curve_geometry.hpp"
#include "quadrature.hpp"
#include "weights_szego.hpp"

namespace curveortho {

struct ExpansionConfig {
  double r = -1.0;        // <0: (1 + rho)/2
  int N = 256;            // initial node count on each contour
  double tol = 1e-14;     // truncation threshold on the a-priori term bound
  int k_max = 200;
  bool adapt_N = true;    // double N until gamma_n is stable to 1e-12
  int N_max = 1 << 14;
  bool check_bounds = true;
};

inline double resolve_r(const SzegoPack& pack, const ExpansionConfig& cfg) {
  const double r = cfg.r > 0.0 ? cfg.r : 0.5 * (1.0 + pack.rho());
  if (!(r > pack.rho() && r < 1.0))
    throw Error(ErrorKind::Configuration, "expansion: r must satisfy rho < r < 1", r);
  return r;
}

inline void validate(const ExpansionConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw Error(ErrorKind::Configuration, "expansion: tol must be positive");
  if (cfg.k_max < 1) throw Error(ErrorKind::Configuration, "expansion: k_max must be >= 1");
  if (!quad::is_power_of_two(cfg.N) || cfg.N < 4) throw Error(ErrorKind::Configuration, "expansion: N must be a power of two >= 4");
}

enum class Sequence { F, G };

// ---------------------------------------------------------------------------
// bounds

struct Bounds {
  double lambda = 0.0;        // max over L_r of |Delta_e Delta_i / sqrt(phi')|
  double lambda_prime = 0.0;  // max over L_{1/r} of |sqrt(phi') Delta_e Delta_i|^{-1}
  double M = 0.0;             // max over L_r x L_{1/r} of |W|
  double r = 0.0;
  int grid = 0;
};

/// Dense-grid data on L_r used for the bounds and the per-point max |W(., z)|.
struct BoundGrid {
  Bounds bounds;
  std::vector<InteriorMap::Point> inner;  // phi_int data on the 4N grid of L_r
  std::vector<cplx> inner_z;
};

inline BoundGrid compute_bound_grid(const SzegoPack& pack, double r, int N) {
  const Curve& curve = pack.curve();
  const InteriorMap& map = pack.interior_map();
  const int g = 4 * N;
  BoundGrid out;
  out.bounds.r = r;
  out.bounds.grid = g;
  out.inner.resize(g);
  out.inner_z.resize(g);
  for (int j = 0; j < g; ++j) {
    const cplx w = r * unit(node_angle(j, g));
    const cplx z = curve.psi(w);
    const cplx dd = pack.delta_product_w(w);
    const cplx sq = curve.sqrt_dpsi(w);
    out.bounds.lambda = std::max(out.bounds.lambda, std::abs(dd * sq));
    const cplx v = 1.0 / std::conj(w);
    out.bounds.lambda_prime = std::max(out.bounds.lambda_prime, std::abs(curve.sqrt_dpsi(v) * std::conj(dd)));
    out.inner[j] = map.at(z, std::nullopt);
    out.inner_z[j] = z;
  }
  // pairs grid; contains the quadrature nodes whenever N <= 512
  const int gm = std::min(g, std::max(N, 2048));
  const int stride = g / gm;
  std::vector<InteriorMap::Point> outer(gm);
  for (int j = 0; j < gm; ++j) {
    const cplx v = (1.0 / r) * unit(node_angle(j, gm));
    outer[j] = map.at(curve.psi(v), v);
  }
  double m = 0.0;
  for (int i = 0; i < g; i += stride)
    for (const auto& po : outer) m = std::max(m, std::abs(InteriorMap::kernel(out.inner[i], po)));
  out.bounds.M = m;
  return out;
}

inline Bounds compute_bounds(const SzegoPack& pack, double r, int N = 256) { return compute_bound_grid(pack, r, N).bounds; }

struct Contraction {
  bool ok = false;
  double q = 0.0;
  int smallest_n = 0;  // first degree with q < 1
};

/// q = Lambda Lambda' M r^{2n} / (1/r - r) (the g-sequence uses r^{2n+2}).
inline Contraction check_contraction(const Bounds& b, int n, Sequence seq = Sequence::F) {
  const double base = b.lambda * b.lambda_prime * b.M / (1.0 / b.r - b.r);
  const double extra = seq == Sequence::G ? 2.0 : 0.0;
  Contraction c;
  c.q = base * std::pow(b.r, 2.0 * n + extra);
  c.ok = c.q < 1.0;
  if (base <= 0.0) c.smallest_n = 0;
  else c.smallest_n = std::max(0, static_cast<int>(std::floor(-std::log(base) / (2.0 * std::log(b.r)) - extra / 2.0)) + 1);
  while (c.smallest_n > 0 && base * std::pow(b.r, 2.0 * (c.smallest_n - 1) + extra) < 1.0) --c.smallest_n;
  while (base * std::pow(b.r, 2.0 * c.smallest_n + extra) >= 1.0) ++c.smallest_n;
  return c;
}

// ---------------------------------------------------------------------------
// transform engine

enum class Region { Exterior, Annulus, Interior };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::Exterior: return "exterior";
    case Region::Annulus: return "annulus";
    case Region::Interior: return "interior";
  }
  return "?";
}

struct TermBoundCheck {
  long samples = 0;
  long violations = 0;
  double worst_ratio = 0.0;  // max |term| / bound
};

/// Node data and summed samples of one expansion (fixed pack, r, N, n, sequence).
/// Inner nodes w_i = r e^{i t_i} on T_r, outer nodes v_j = e^{i t_j}/r on T_{1/r}.
class TransformEngine {
 public:
  struct Target {
    cplx z;
    std::optional<cplx> w;
    Region region = Region::Interior;
    std::optional<InteriorMap::Point> p;
    int up_inner = 1;
    int up_outer = 1;
  };

  TransformEngine(const SzegoPack& pack, double r, int N, int n, Sequence seq)
      : pack_(&pack), r_(r), N_(N), n_(n), seq_(seq) {
    const Curve& curve = pack.curve();
    const InteriorMap& map = pack.interior_map();
    w_.resize(N);
    v_.resize(N);
    zeta_.resize(N);
    eta_.resize(N);
    pin_.resize(N);
    pout_.resize(N);
    A_.resize(N);
    B_.resize(N);
    for (int j = 0; j < N; ++j) {
      const cplx e = unit(node_angle(j, N));
      w_[j] = r * e;
      v_[j] = e / r;
      zeta_[j] = curve.psi(w_[j]);
      eta_[j] = curve.psi(v_[j]);
      pin_[j] = map.at(zeta_[j], std::nullopt);
      pout_[j] = map.at(eta_[j], v_[j]);
      const cplx dd = pack.delta_product_w(w_[j]);
      A_[j] = dd * curve.sqrt_dpsi(w_[j]) * std::pow(w_[j], n + 1);
      B_[j] = curve.sqrt_dpsi(v_[j]) * std::pow(v_[j], -n) * std::conj(dd);  // 1/(Delta_e Delta_i) on L_{1/r}
    }
    double h = 0.0;
    for (int j = 0; j < N; ++j) {
      h_in_ = std::max(h_in_, std::abs(zeta_[(j + 1) % N] - zeta_[j]));
      h = std::max(h, std::abs(eta_[(j + 1) % N] - eta_[j]));
    }
    h_out_ = h;
    even_.assign(N, cplx{1.0});
    E_ = even_;
    odd_.assign(N, cplx{0.0});
    O_.assign(N, cplx{0.0});
  }

  int n() const { return n_; }
  int N() const { return N_; }
  double r() const { return r_; }
  Sequence sequence() const { return seq_; }
  int terms() const { return terms_; }
  const SzegoPack& pack() const { return *pack_; }

  const std::vector<cplx>& inner_w() const { return w_; }
  const std::vector<cplx>& outer_w() const { return v_; }
  const std::vector<cplx>& inner_z() const { return zeta_; }
  const std::vector<cplx>& outer_z() const { return eta_; }
  /// Latest even term f^(2k) on the inner nodes and latest odd term on the outer nodes.
  const std::vector<cplx>& even_samples() const { return even_; }
  const std::vector<cplx>& odd_samples() const { return odd_; }
  const std::vector<cplx>& even_sum_samples() const { return E_; }
  const std::vector<cplx>& odd_sum_samples() const { return O_; }
  /// Latest odd term on the inner nodes would need a principal value; the even
  /// term on the outer nodes likewise. Neither is formed.

  /// f^(2k+1) on L_{1/r} from the current even samples on L_r.
  void odd_step() {
    std::vector<cplx> d(N_);
    for (int i = 0; i < N_; ++i) d[i] = even_[i] * A_[i];
    for (int j = 0; j < N_; ++j) {
      cplx acc = 0.0;
      for (int i = 0; i < N_; ++i) acc += d[i] * InteriorMap::kernel(pin_[i], pout_[j]);
      odd_[j] = -acc / static_cast<double>(N_);
    }
    last_even_for_odd_ = even_;
    for (int j = 0; j < N_; ++j) O_[j] += odd_[j];
    ++terms_;
  }

  /// f^(2k+2) on L_r from the current odd samples on L_{1/r}; returns the
  /// contribution of this odd term to the gamma_n series.
  cplx even_step() {
    std::vector<cplx> c(N_);
    cplx gam = 0.0;
    for (int j = 0; j < N_; ++j) {
      c[j] = odd_[j] * B_[j];
      gam += c[j];
    }
    gam /= static_cast<double>(N_);
    last_odd_for_even_ = odd_;
    for (int i = 0; i < N_; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < N_; ++j) acc += c[j] * kernel_even(v_[j], w_[i]);
      even_[i] = acc / static_cast<double>(N_);
      E_[i] += even_[i];
    }
    ++terms_;
    return gam;
  }

  /// Series coefficient value at infinity of the even term just produced
  /// (f: 0; g: minus the gamma contribution).
  cplx even_at_infinity_from(cplx gamma_contribution) const {
    return seq_ == Sequence::F ? cplx{0.0} : -gamma_contribution;
  }

  Target prepare(cplx z) const {
    const Curve& curve = pack_->curve();
    Target t;
    t.z = z;
    t.w = curve.try_phi(z);
    const double eps = 1e-6;
    if (t.w) {
      const double m = std::abs(*t.w);
      if (m > 1.0 / r_ + eps) t.region = Region::Exterior;
      else if (m > r_ - eps) t.region = Region::Annulus;
      else t.region = Region::Interior;
    }
    if (t.region != Region::Exterior) {
      t.p = pack_->interior_map().at(z, t.w && std::abs(*t.w) > 1.0 ? t.w : std::nullopt);
      t.up_inner = upsample_factor(t.w, z, r_, zeta_, h_in_);
    }
    if (t.region != Region::Interior) t.up_outer = upsample_factor(t.w, z, 1.0 / r_, eta_, h_out_);
    return t;
  }

  /// Sum over all computed odd terms at a target (z off L_r).
  cplx odd_sum_at(const Target& t) const { return odd_from(E_, t); }
  /// Sum over all computed even terms, f^(0) = 1 included.
  cplx even_sum_at(const Target& t) const { return 1.0 + even_from(O_, t); }

  /// Latest odd term at a target (built from the even samples that produced it).
  cplx odd_term_at(const Target& t) const { return odd_from(last_even_for_odd_, t); }
  cplx even_term_at(const Target& t) const { return even_from(last_odd_for_even_, t); }

  /// Region-dispatched right-hand side of the expansion identity at a target.
  cplx rhs(const Target& t) const {
    const Curve& curve = pack_->curve();
    cplx val = 0.0;
    if (t.region != Region::Interior) {
      const cplx w = *t.w;
      val += pack_->delta_e_w(w) / curve.sqrt_dpsi(w) * std::pow(w, n_) * even_sum_at(t);
    }
    if (t.region != Region::Exterior) {
      const cplx inv = t.w && std::abs(*t.w) > 1.0 ? pack_->inv_delta_i(t.z, t.w) : 1.0 / pack_->delta_i(t.z);
      val -= inv * odd_sum_at(t);
    }
    return val;
  }

  /// max over the dense L_r grid of |W(zeta, z)|.
  static double max_kernel(const BoundGrid& grid, const InteriorMap::Point& p) {
    double m = 0.0;
    for (const auto& q : grid.inner) m = std::max(m, std::abs(InteriorMap::kernel(q, p)));
    return m;
  }

  const InteriorMap::Point& outer_point(int j) const { return pout_[j]; }

 private:
  cplx kernel_even(cplx v, cplx w) const { return seq_ == Sequence::F ? v / (v - w) : w / (v - w); }

  // Trapezoid error for a pole at w is about exp(-N |log(|w|/radius)|); pick the
  // smallest refinement that pushes it below 1e-16.
  int upsample_factor(const std::optional<cplx>& w, cplx z, double radius, const std::vector<cplx>& nodes, double h) const {
    double reach;
    if (w) {
      reach = std::abs(std::log(std::abs(*w) / radius));
    } else {
      // phi(z) undefined: z lies deep inside; use the node distance
      double d = std::numeric_limits<double>::infinity();
      for (const auto& x : nodes) d = std::min(d, std::abs(x - z));
      reach = kTwoPi * d / (h * N_);
    }
    int f = 1;
    while (f < 256 && N_ * f * reach < 37.0) f *= 2;
    if (N_ * f * reach < 37.0) return -1;  // too close: caller re-routes
    return f;
  }

  const std::vector<InteriorMap::Point>& fine_inner(int f) const {
    auto it = fine_in_.find(f);
    if (it != fine_in_.end()) return it->second;
    const int m = N_ * f;
    std::vector<InteriorMap::Point> pts(m);
    for (int j = 0; j < m; ++j) pts[j] = pack_->interior_map().at(pack_->curve().psi(r_ * unit(node_angle(j, m))), std::nullopt);
    return fine_in_.emplace(f, std::move(pts)).first->second;
  }

  cplx odd_from(const std::vector<cplx>& even, const Target& t) const {
    if (t.up_inner < 0) throw Error(ErrorKind::ContourProximity, "target too close to L_r");
    std::vector<cplx> d(N_);
    for (int i = 0; i < N_; ++i) d[i] = even[i] * A_[i];
    const InteriorMap::Point& pz = *t.p;
    cplx acc = 0.0;
    if (t.up_inner == 1) {
      for (int i = 0; i < N_; ++i) acc += d[i] * InteriorMap::kernel(pin_[i], pz);
      return -acc / static_cast<double>(N_);
    }
    const auto fine = quad::upsample_periodic(d, t.up_inner);
    const auto& pts = fine_inner(t.up_inner);
    for (std::size_t i = 0; i < fine.size(); ++i) acc += fine[i] * InteriorMap::kernel(pts[i], pz);
    return -acc / static_cast<double>(fine.size());
  }

  cplx even_from(const std::vector<cplx>& odd, const Target& t) const {
    if (t.up_outer < 0) throw Error(ErrorKind::ContourProximity, "target too close to L_{1/r}");
    const cplx w = *t.w;
    std::vector<cplx> c(N_);
    for (int j = 0; j < N_; ++j) c[j] = odd[j] * B_[j];
    cplx acc = 0.0;
    if (t.up_outer == 1) {
      for (int j = 0; j < N_; ++j) acc += c[j] * kernel_even(v_[j], w);
      return acc / static_cast<double>(N_);
    }
    const auto fine = quad::upsample_periodic(c, t.up_outer);
    const int m = static_cast<int>(fine.size());
    for (int j = 0; j < m; ++j) acc += fine[j] * kernel_even(unit(node_angle(j, m)) / r_, w);
    return acc / static_cast<double>(m);
  }

  const SzegoPack* pack_;
  double r_;
  int N_;
  int n_;
  Sequence seq_;
  int terms_ = 0;
  std::vector<cplx> w_, v_, zeta_, eta_;
  std::vector<InteriorMap::Point> pin_, pout_;
  std::vector<cplx> A_, B_;
  double h_in_ = 0.0, h_out_ = 0.0;
  std::vector<cplx> even_, odd_, E_, O_;
  std::vector<cplx> last_even_for_odd_, last_odd_for_even_;
  mutable std::map<int, std::vector<InteriorMap::Point>> fine_in_;
};

// ---------------------------------------------------------------------------
// expansions

struct TargetValue {
  cplx z;
  cplx value;  // monic P_n(z)
  Region branch = Region::Interior;
};

struct ExpansionResult {
  int n = 0;
  Sequence sequence = Sequence::F;
  double gamma = 0.0;
  cplx series_at_infinity = 1.0;  // 1 + sum of gamma contributions (f) or sum g^(2k)(infinity) (g)
  int terms_used = 0;
  double bound_residual = 0.0;
  double q = 0.0;
  int N = 0;
  double r = 0.0;
  Bounds bounds;
  TermBoundCheck term_bounds;
  std::vector<TargetValue> targets;
  std::vector<std::string> warnings;
  std::shared_ptr<const TransformEngine> engine;
  // shifted-r engine for near-contour targets, built on first use
  struct Lazy {
    std::once_flag once;
    std::function<std::shared_ptr<const TransformEngine>()> build;
    std::shared_ptr<const TransformEngine> engine;
  };
  std::shared_ptr<Lazy> auxiliary_slot;

  std::shared_ptr<const TransformEngine> auxiliary() const {
    if (!auxiliary_slot || !auxiliary_slot->build) return nullptr;
    std::call_once(auxiliary_slot->once, [this] { auxiliary_slot->engine = auxiliary_slot->build(); });
    return auxiliary_slot->engine;
  }

  /// Monic P_n at an arbitrary point (region dispatched).
  cplx evaluate(cplx z) const { return evaluate_with_branch(z).value; }

  TargetValue evaluate_with_branch(cplx z) const {
    try {
      return evaluate_on(*engine, z);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ContourProximity) throw;
      const auto aux = auxiliary();
      if (!aux) throw;
      return evaluate_on(*aux, z);
    }
  }

  /// Same point through a forced branch (for branch-agreement checks).
  cplx evaluate_branch(cplx z, Region region) const {
    auto t = engine->prepare(z);
    if (region != Region::Interior && !t.w) throw Error(ErrorKind::Domain, "evaluate_branch: phi(z) undefined");
    if (region != Region::Exterior && !t.p) {
      t.p = engine->pack().interior_map().at(z, t.w && std::abs(*t.w) > 1.0 ? t.w : std::nullopt);
      t.up_inner = 256;
    }
    t.region = region;
    return normalise(*engine, engine->rhs(t));
  }

  cplx normalise(const TransformEngine& eng, cplx rhs) const {
    const SzegoPack& pack = eng.pack();
    const double c1 = pack.curve().c1();
    const double scale = std::pow(c1, n + 0.5) / pack.delta_e_inf();
    return sequence == Sequence::F ? rhs * scale : rhs * scale / series_at_infinity;
  }

 private:
  TargetValue evaluate_on(const TransformEngine& eng, cplx z) const {
    const auto t = eng.prepare(z);
    return {z, normalise(eng, eng.rhs(t)), t.region};
  }
};

namespace detail {

struct RunOutput {
  std::shared_ptr<TransformEngine> engine;
  cplx series_inf = 1.0;
  double bound_residual = 0.0;
  TermBoundCheck checks;
  bool truncated = false;
};

inline void tally(TermBoundCheck& c, double value, double bound) {
  ++c.samples;
  const double ratio = bound > 0.0 ? value / bound : (value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  c.worst_ratio = std::max(c.worst_ratio, ratio);
  if (value > bound * (1.0 + 1e-8) + 1e-300) ++c.violations;
}

/// Runs the recursion for one node count; checks every sample against the
/// a-priori bounds and stops once the bound on the next term drops below tol.
inline RunOutput run_expansion(const SzegoPack& pack, const BoundGrid& grid, double r, int N, int n, Sequence seq,
                               const ExpansionConfig& cfg, const std::vector<cplx>& targets) {
  RunOutput out;
  out.engine = std::make_shared<TransformEngine>(pack, r, N, n, seq);
  TransformEngine& eng = *out.engine;
  const Bounds& b = grid.bounds;
  const double rr = seq == Sequence::G ? 2.0 * n + 2.0 : 2.0 * n;
  const double q = b.lambda * b.lambda_prime * b.M * std::pow(r, rr) / (1.0 / r - r);
  const double lead = b.lambda * std::pow(r, n + 1);
  const double even_lead = b.lambda * b.lambda_prime * b.M * std::pow(r, seq == Sequence::G ? 2.0 * n + 1 : 2.0 * n);

  // per-sample max |W(., x)| for outer nodes and targets
  std::vector<double> wmax_outer;
  std::vector<TransformEngine::Target> tgt;
  std::vector<double> wmax_tgt;
  if (cfg.check_bounds) {
    wmax_outer.resize(N);
    for (int j = 0; j < N; ++j) wmax_outer[j] = TransformEngine::max_kernel(grid, eng.outer_point(j));
    for (const auto& z : targets) {
      auto t = eng.prepare(z);
      if (t.up_inner < 0 || t.up_outer < 0) continue;
      if (!t.p && t.w && std::abs(*t.w) < 1.0 / pack.rho()) t.p = pack.interior_map().at(z, std::abs(*t.w) > 1.0 ? t.w : std::nullopt);
      wmax_tgt.push_back(t.p ? TransformEngine::max_kernel(grid, *t.p) : 0.0);
      tgt.push_back(t);
    }
  }
  const double outer_mod = 1.0 / r;
  cplx series = 1.0;
  for (int k = 0; k < cfg.k_max; ++k) {
    const double qk = std::pow(q, k);
    eng.odd_step();
    if (cfg.check_bounds) {
      for (int j = 0; j < N; ++j) tally(out.checks, std::abs(eng.odd_samples()[j]), lead * qk * wmax_outer[j]);
      for (std::size_t t = 0; t < tgt.size(); ++t)
        if (tgt[t].p) tally(out.checks, std::abs(eng.odd_term_at(tgt[t])), lead * qk * wmax_tgt[t]);
    }
    const cplx contrib = eng.even_step();
    series += seq == Sequence::F ? contrib : -contrib;
    if (cfg.check_bounds) {
      const double denom = 1.0 / r - r;
      for (int i = 0; i < N; ++i) tally(out.checks, std::abs(eng.even_samples()[i]), (seq == Sequence::G ? r : 1.0) * even_lead / denom * qk);
      for (const auto& t : tgt) {
        if (!t.w || t.region == Region::Interior) continue;
        const double m = std::abs(*t.w);
        const double bound = (seq == Sequence::G ? m : 1.0) * even_lead / std::abs(outer_mod - m) * qk;
        tally(out.checks, std::abs(eng.even_term_at(t)), bound);
      }
    }
    // bound on the next odd / even term
    const double qn = qk * q;
    double next = std::max(lead * qn * b.M, even_lead / (1.0 / r - r) * qn);
    for (double wm : wmax_tgt) next = std::max(next, lead * qn * wm);
    out.bound_residual = next;
    if (next < cfg.tol) break;
    if (k + 1 == cfg.k_max) out.truncated = true;
  }
  out.series_inf = series;
  return out;
}

inline double gamma_from_series(const SzegoPack& pack, int n, Sequence seq, cplx series) {
  const double c1 = pack.curve().c1();
  const double de = pack.delta_e_inf();
  if (!(series.real() > 0.0)) throw Error(ErrorKind::ContractionViolated, "expansion: gamma series is not positive", series.real());
  if (seq == Sequence::F) return de * std::pow(c1, -n - 0.5) / std::sqrt(series.real());
  return de * std::pow(c1, -n - 0.5) * std::sqrt(series.real());
}

}  // namespace detail

/// Shared driver for both expansions.
inline ExpansionResult expand(const SzegoPack& pack, ExpansionConfig cfg, int n, const std::vector<cplx>& targets, Sequence seq) {
  validate(cfg);
  if (n < 0) throw Error(ErrorKind::Precondition, "expansion: n must be >= 0");
  const double r = resolve_r(pack, cfg);
  int N = cfg.N;
  BoundGrid grid = compute_bound_grid(pack, r, N);
  const Contraction c = check_contraction(grid.bounds, n, seq);
  if (!c.ok)
    throw Error(ErrorKind::ContractionViolated,
                "expansion: contraction condition fails; smallest admissible n = " + std::to_string(c.smallest_n),
                c.smallest_n);

  ExpansionResult res;
  res.n = n;
  res.sequence = seq;
  res.r = r;
  res.q = c.q;
  detail::RunOutput run = detail::run_expansion(pack, grid, r, N, n, seq, cfg, targets);
  double gamma = detail::gamma_from_series(pack, n, seq, run.series_inf);
  if (cfg.adapt_N) {
    for (;;) {
      if (2 * N > cfg.N_max) {
        res.warnings.push_back("N adaptivity reached the cap without gamma_n stabilising");
        break;
      }
      const int n2 = 2 * N;
      BoundGrid g2 = compute_bound_grid(pack, r, n2);
      detail::RunOutput run2 = detail::run_expansion(pack, g2, r, n2, n, seq, cfg, targets);
      const double gamma2 = detail::gamma_from_series(pack, n, seq, run2.series_inf);
      const double change = std::abs(gamma2 - gamma) / gamma;
      N = n2;
      grid = std::move(g2);
      run = std::move(run2);
      gamma = gamma2;
      if (change < 1e-12) break;
    }
  }
  res.N = N;
  res.bounds = grid.bounds;
  res.gamma = gamma;
  res.series_at_infinity = run.series_inf;
  res.terms_used = run.engine->terms();
  res.bound_residual = run.bound_residual;
  res.term_bounds = run.checks;
  if (run.truncated) res.warnings.push_back("truncation tolerance not reached within k_max terms");
  if (std::abs(run.series_inf.imag()) > 1e-8 * std::abs(run.series_inf))
    res.warnings.push_back("gamma series has a non-negligible imaginary part");
  res.engine = run.engine;

  // auxiliary engine with a shifted r for targets sitting on a contour
  res.auxiliary_slot = std::make_shared<ExpansionResult::Lazy>();
  res.auxiliary_slot->build = [&pack, cfg, r, N, n, seq]() {
    ExpansionConfig aux = cfg;
    aux.adapt_N = false;
    aux.N = N;
    aux.check_bounds = false;
    double r2 = r - 0.3 * (r - pack.rho());
    BoundGrid ga = compute_bound_grid(pack, r2, N);
    if (!check_contraction(ga.bounds, n, seq).ok) {
      r2 = r + 0.3 * (1.0 - r);
      ga = compute_bound_grid(pack, r2, N);
    }
    return std::shared_ptr<const TransformEngine>(detail::run_expansion(pack, ga, r2, N, n, seq, aux, {}).engine);
  };
  for (const auto& z : targets) res.targets.push_back(res.evaluate_with_branch(z));
  return res;
}

/// f-sequences, gamma_n from the L_{1/r} series.
inline ExpansionResult expand_thm1(const SzegoPack& pack, const ExpansionConfig& cfg, int n, const std::vector<cplx>& targets) {
  return expand(pack, cfg, n, targets, Sequence::F);
}

/// g-sequences, gamma_n^2 from the values at infinity.
inline ExpansionResult expand_thm2(const SzegoPack& pack, const ExpansionConfig& cfg, int n, const std::vector<cplx>& targets) {
  return expand(pack, cfg, n, targets, Sequence::G);
}

}  // namespace curveortho
