// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "curveortho/curveortho.hpp"

using namespace curveortho;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Case {
  Curve curve;
  InteriorMap map;
  SzegoPack pack;
};

Case make_case(CurveSpec cs, WeightSpec w) {
  Curve c = make_curve(std::move(cs));
  InteriorMap m = fit_interior_map(c, c.spec().c0);
  SzegoPack p = build_szego_pack(m, std::move(w));
  return {c, m, p};
}

CurveSpec circle() { return CurveSpec{}; }
CurveSpec joukowski(double c) {
  CurveSpec s;
  s.cneg = {c};
  return s;
}
WeightSpec unit_weight(double rho) { return WeightSpec::generic(LaurentSeries::constant(1.0), rho); }
WeightSpec shifted(double a) { return WeightSpec::generic(LaurentSeries{{-a, 1.0}, {}}, a); }
WeightSpec singular(std::vector<SingularPoint> pts) { return WeightSpec::singular(LaurentSeries::constant(1.0), std::move(pts)); }

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", v);
  return b;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) { return detail::slope(x, y); }

long total_violations = 0;  // term-bound violations over every expansion run here
long total_samples = 0;

void tally(const ExpansionResult& e) {
  total_violations += e.term_bounds.violations;
  total_samples += e.term_bounds.samples;
}

int smallest_admissible(const SzegoPack& pack, double r, Sequence seq = Sequence::F) {
  return check_contraction(compute_bounds(pack, r, 256), 0, seq).smallest_n;
}

// ---------------------------------------------------------------------------

void exact_case(Outcome& o) {
  const Case c = make_case(circle(), unit_weight(0.0));
  ExpansionConfig cfg;
  cfg.r = 0.5;
  cfg.N = 64;
  std::vector<cplx> targets;
  for (int j = 0; j < 50; ++j) targets.push_back((0.1 + 0.05 * j) * unit(0.7 * j + 0.05));
  double err = 0.0, gerr = 0.0;
  for (int n = 0; n <= 20; ++n) {
    const ExpansionResult f = expand_thm1(c.pack, cfg, n, targets);
    const ExpansionResult g = expand_thm2(c.pack, cfg, n, targets);
    tally(f);
    tally(g);
    gerr = std::max({gerr, std::abs(f.gamma - 1.0), std::abs(g.gamma - 1.0)});
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const cplx exact = std::pow(targets[k], n);
      const double s = std::max(1.0, std::abs(exact));
      err = std::max({err, std::abs(f.targets[k].value - exact) / s, std::abs(g.targets[k].value - exact) / s});
    }
  }
  double f2 = 0.0;
  for (int n : {0, 3, 10, 20}) {
    TransformEngine eng(c.pack, cfg.r, cfg.N, n, Sequence::F);
    eng.odd_step();
    eng.even_step();
    for (const auto& v : eng.even_samples()) f2 = std::max(f2, std::abs(v));
  }
  o.detail << "max |P_n - z^n| " << sci(err) << ", max |gamma_n - 1| " << sci(gerr) << ", max |f2| on L_1/r " << sci(f2);
  o.require(err <= 1e-12, "P_n = z^n to 1e-12");
  o.require(gerr <= 1e-12, "gamma_n = 1 to 1e-12");
  o.require(f2 <= 1e-13, "f2 = 0 to 1e-13");
}

void oracle_equivalence(Outcome& o) {
  std::vector<std::pair<std::string, Case>> cases;
  cases.emplace_back("circle |z-0.5|^2", make_case(circle(), shifted(0.5)));
  cases.emplace_back("ellipse c=0.25", make_case(joukowski(0.25), unit_weight(0.5)));
  ExpansionConfig cfg;
  for (const auto& [name, c] : cases) {
    const double r = resolve_r(c.pack, cfg);
    const int n0 = std::max({5, smallest_admissible(c.pack, r, Sequence::F), smallest_admissible(c.pack, r, Sequence::G)});
    const OrthogonalBasis basis = orthogonal_basis(c.curve, c.pack.weight(), 20);
    std::vector<cplx> targets;
    for (int j = 0; j < 32; ++j) targets.push_back(c.curve.psi(unit(kTwoPi * (j + 0.3) / 32)));
    double perr = 0.0, gerr = 0.0;
    for (int n = n0; n <= 20; ++n) {
      const ExpansionResult f = expand_thm1(c.pack, cfg, n, targets);
      const ExpansionResult g = expand_thm2(c.pack, cfg, n, targets);
      tally(f);
      tally(g);
      double peak = 0.0;
      std::vector<cplx> ov;
      for (const auto& z : targets) {
        ov.push_back(basis.monic(z, n));
        peak = std::max(peak, std::abs(ov.back()));
      }
      for (std::size_t k = 0; k < targets.size(); ++k)
        perr = std::max({perr, std::abs(f.targets[k].value - ov[k]) / peak, std::abs(g.targets[k].value - ov[k]) / peak});
      const double go = basis.gamma(n);
      gerr = std::max({gerr, std::abs(f.gamma / go - 1.0), std::abs(g.gamma / go - 1.0), std::abs(f.gamma / g.gamma - 1.0)});
    }
    o.detail << name << ": n " << n0 << "..20, P_n " << sci(perr) << ", gamma_n " << sci(gerr) << "; ";
    o.require(perr <= 1e-7, name + " P_n agreement");
    o.require(gerr <= 1e-7, name + " gamma_n agreement");
  }
  // hand moments: <1,1> = 1.25, <z,1> = -0.5
  const Curve cc = make_curve(circle());
  const PolyCoeffs p1 = monic_orthogonal(cc, weight_function(shifted(0.5)), 1);
  const OrthogonalBasis b1 = orthogonal_basis(cc, shifted(0.5), 1);
  const double anchor = std::max({std::abs(p1.coeffs[0] - 0.4), std::abs(p1.gamma - 1.0 / std::sqrt(1.05)),
                                  std::abs(b1.monic(0.0, 1) - 0.4), std::abs(b1.gamma(1) - 1.0 / std::sqrt(1.05))});
  o.detail << "P_1 = z + 0.4 anchor " << sci(anchor);
  o.require(anchor <= 1e-10, "hand-moment anchor");
}

void szego_rate(Outcome& o) {
  // the bound O((r/r1)^n) holds for every r in (rho, 1); the observed rate is compared with the sharp end r -> rho
  const Case c = make_case(joukowski(0.25), unit_weight(0.5));
  const OrthogonalBasis basis = orthogonal_basis(c.curve, WeightSpec::unit(), 25);
  const double rho = c.pack.rho();
  for (double r1 : {1.2, 1.5}) {
    std::vector<double> x, y;
    for (int n = 10; n <= 25; ++n) {
      double worst = 0.0;
      for (int j = 0; j < 8; ++j) {
        const cplx z = c.curve.psi(r1 * unit(0.4 + kTwoPi * j / 8));
        const cplx main = szego_exterior_formula(c.pack, n, z);
        worst = std::max(worst, std::abs(basis.monic(z, n) - main) / std::abs(main));
      }
      x.push_back(n);
      y.push_back(std::log(worst));
    }
    const double s = slope(x, y), ref = std::log(rho / r1);
    const double dev = std::abs(s / ref - 1.0);
    o.detail << "r1 = " << r1 << ": slope " << s << " vs log(rho/r1) = " << ref << " (" << 100 * dev << "%); ";
    o.require(dev <= 0.15, "slope within 15% at r1 = " + std::to_string(r1));
  }
}

void gamma_rate(Outcome& o) {
  // circle with h = |z - 0.8|^2 keeps the error above the extended-precision floor on all of [10, 25];
  // the ellipse decays past that floor after n ~ 20 and is fitted where it is resolved
  struct Run {
    std::string name;
    Case c;
    int n_hi;
  };
  std::vector<Run> runs;
  runs.push_back({"circle |z-0.8|^2", make_case(circle(), shifted(0.8)), 25});
  runs.push_back({"ellipse c=0.25", make_case(joukowski(0.25), unit_weight(0.5)), 25});
  for (auto& run : runs) {
    const OrthogonalBasis basis = orthogonal_basis(run.c.curve, run.c.pack.weight(), run.n_hi);
    const double rho = run.c.pack.rho();
    std::vector<double> x, y;
    bool decreasing = true;
    double prev = 1e300, C = 0.0;
    for (int n = 10; n <= run.n_hi; ++n) {
      const long double main = gamma_asymptotic(run.c.pack, n);
      const double e = static_cast<double>(std::abs(main / basis.gamma_ext(n) - 1.0L));
      if (e < 1e-17) break;  // extended-precision floor of the oracle
      decreasing = decreasing && e < prev;
      prev = e;
      x.push_back(n);
      y.push_back(std::log(e));
      C = std::max(C, e / std::pow(rho, 2.0 * n));
    }
    const double s = x.size() >= 3 ? slope(x, y) : 0.0, ref = 2.0 * std::log(rho);
    const double dev = std::abs(s / ref - 1.0);
    o.detail << run.name << ": n 10.." << (x.empty() ? 0 : static_cast<int>(x.back())) << ", exponent " << s << " vs 2 log rho = " << ref
             << " (" << 100 * dev << "%), C = " << sci(C) << "; ";
    o.require(x.size() >= 6, run.name + " enough resolved degrees");
    o.require(decreasing, run.name + " decreasing");
    o.require(dev <= 0.20, run.name + " exponent within 20%");
  }
}

void theorem3(Outcome& o) {
  const Case c = make_case(circle(), singular({{0.5, 0.5}}));
  const SingularityData sd = alpha_constants(c.pack);
  const OrthogonalBasis basis = orthogonal_basis(c.curve, c.pack.weight(), 40);
  const std::vector<cplx> pts{cplx(0.0, 0.2), cplx(-0.2, 0.0), cplx(0.3, 0.3), cplx(0.0, 0.8), cplx(0.6, 0.3)};
  double worst_ratio = 0.0;
  for (const auto& z : pts) {
    std::vector<double> rel;
    for (int n = 10; n <= 40; n += 5) {
      const SingularTerms t = thm3_interior(c.pack, sd, n, z);
      rel.push_back(std::abs(basis.monic(z, n) - t.value) / t.scale);
    }
    bool dec = true;
    for (std::size_t i = 1; i < rel.size(); ++i) dec = dec && rel[i] < rel[i - 1];
    const double ratio = rel.back() / rel.front();
    worst_ratio = std::max(worst_ratio, ratio);
    std::ostringstream zs;
    zs << z;
    o.require(dec, "decreasing at " + zs.str());
    o.require(ratio <= 0.5, "terminal <= 0.5 initial at " + zs.str());
  }
  const cplx v = thm3_at_singularity(c.pack, sd, 40, 0);
  const double at_a = std::abs(basis.monic(0.5, 40) - v) / std::abs(v);
  o.detail << "5 points, n 10..40: worst terminal/initial " << worst_ratio << "; at a: rel err " << sci(at_a) << " (n = 40)";
  o.require(at_a <= 0.10, "relative error at a <= 10%");
}

void proposition(Outcome& o) {
  const double rho = 0.5, delta = 0.1;
  const std::vector<int> ns{10, 20, 40, 80};
  const std::function<cld(cld)> one = [](cld) { return cld(1); };
  const std::function<cld(cld)> lin = [](cld t) { return cld(1) + t; };
  double exact = 0.0;
  for (const auto* v : {&one, &lin})
    for (int n : {3, 10, 20, 40, 80}) {
      const cplx q = proposition_I(*v, 1.0, rho, delta, n, PropositionMode::Quadrature);
      const cplx a = proposition_I(*v, 1.0, rho, delta, n, PropositionMode::Asymptotic);
      exact = std::max(exact, std::abs(q - a) / std::abs(a));
    }
  o.detail << "beta = 1: " << sci(exact) << "; ";
  o.require(exact <= 1e-12, "beta = 1 exact");
  for (double beta : {0.5, 1.5, 2.0})
    for (const auto& [vname, v] : {std::pair<const char*, const std::function<cld(cld)>*>{"1", &one}, {"1+t", &lin}}) {
      std::vector<double> x, y, rel;
      for (int n : ns) {
        const cplx q = proposition_I(*v, beta, rho, delta, n, PropositionMode::Quadrature);
        const cplx a = proposition_I(*v, beta, rho, delta, n, PropositionMode::Asymptotic);
        rel.push_back(std::abs(q - a) / std::abs(a));
        x.push_back(std::log(n));
        y.push_back(std::log(std::max(rel.back(), 1e-300)));
      }
      const double top = *std::max_element(rel.begin(), rel.end());
      const std::string tag = "beta " + std::to_string(beta).substr(0, 3) + " v=" + vname;
      o.detail << tag << ": ";
      if (top <= 1e-12) {
        // remainder vanishes identically (beta = 2, constant v)
        o.detail << "exact " << sci(top) << "; ";
        continue;
      }
      bool dec = true;
      for (std::size_t i = 1; i < rel.size(); ++i) dec = dec && rel[i] < rel[i - 1];
      const double p = -slope(x, y);
      o.detail << sci(rel.front()) << " -> " << sci(rel.back()) << ", exponent " << p << "; ";
      o.require(dec, tag + " decreasing");
      o.require(p >= 0.75, tag + " decays at least like C/n within 25%");
    }
}

void zero_suite(Outcome& o) {
  struct Z {
    std::string name;
    CurveSpec curve;
    std::vector<SingularPoint> pts;
  };
  const Curve ell = make_curve(joukowski(0.25));
  const std::vector<Z> runs{{"circle a=0.5", circle(), {{0.5, 0.5}}},
                            {"circle a=+-0.5", circle(), {{0.5, 0.5}, {-0.5, 0.5}}},
                            {"ellipse", joukowski(0.25), {{ell.psi(0.7 * unit(1.1)), 0.5}}}};
  const int n = 50;
  for (const auto& run : runs) {
    const Case c = make_case(run.curve, singular(run.pts));
    const SingularityData sd = alpha_constants(c.pack);
    const OrthogonalBasis basis = orthogonal_basis(c.curve, c.pack.weight(), n);
    const ZeroSet zs = roots(basis, n, &c.curve);
    const double rho = c.pack.rho();
    const EquilibriumStat ks = equilibrium_compare(zs);
    const RegionReport ext = zero_free_region_check(zs, {RegionSpec::Side::Exterior, rho + 0.1}, sd.u);
    const RegionReport in = zero_free_region_check(zs, {RegionSpec::Side::Interior, 0.4 * rho}, sd.u);
    double pot = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const cplx z = c.curve.psi((1.0 + 0.3 * k) * unit(1.3 * k));
      pot = std::max(pot, std::abs(discrete_potential(zs, z) - equilibrium_potential(c.curve, z)));
    }
    o.detail << run.name << ": KS " << ks.ks << ", exterior " << ext.count << ", interior " << in.count << "/" << in.allowed
             << ", potential " << sci(pot) << "; ";
    o.require(ks.ks < 0.15, run.name + " KS");
    o.require(ext.ok, run.name + " exterior count");
    o.require(in.ok, run.name + " interior count");
    o.require(pot <= 0.05, run.name + " potential");
  }
}

void invariants(Outcome& o) {
  // boundary moduli
  {
    double worst = 0.0;
    const Curve ell = make_curve(joukowski(0.25));
    const std::vector<std::pair<CurveSpec, WeightSpec>> packs{
        {circle(), shifted(0.5)},
        {joukowski(0.25), unit_weight(0.5)},
        {joukowski(0.25), WeightSpec::generic(LaurentSeries{{-ell.psi(0.8), 1.0}, {}}, 0.8)},
        {circle(), singular({{0.5, 0.5}})},
        {joukowski(0.25), singular({{ell.psi(0.7 * unit(-2.0)), 1.5}, {ell.psi(0.7 * unit(1.1)), 0.5}})}};
    for (const auto& [cs, ws] : packs) {
      const Case c = make_case(cs, ws);
      for (int j = 0; j < 97; ++j) {
        const cplx w = unit(kTwoPi * (j + 0.29) / 97);
        const cplx z = c.curve.psi(w);
        const double hv = c.pack.h_unchecked(z);
        worst = std::max({worst, std::abs(1.0 / (std::norm(c.pack.delta_e_w(w)) * hv) - 1.0),
                          std::abs(std::norm(c.pack.delta_i(z)) / hv - 1.0)});
      }
    }
    o.detail << "moduli " << sci(worst) << "; ";
    o.require(worst <= 1e-9, "boundary moduli");
  }
  // reflection involution
  {
    const Curve ell = make_curve(joukowski(0.25));
    double worst = 0.0;
    for (int j = 0; j < 24; ++j)
      for (double s : {0.9, 1.05, 1.2}) {
        const cplx z = ell.psi(s * unit(0.27 * j));
        worst = std::max(worst, std::abs(ell.reflect(ell.reflect(z)) - z));
      }
    o.detail << "reflection " << sci(worst) << "; ";
    o.require(worst <= 1e-10, "reflection involution");
  }
  // kernel normalisation
  {
    const Curve ell = make_curve(joukowski(0.25));
    const InteriorMap m0 = fit_interior_map(ell, 0.0);
    InteriorFitOptions opt;
    opt.nonvanishing_radius = 0.9;
    const InteriorMap m1 = fit_interior_map(ell, cplx(0.2, 0.1), opt);
    double worst = 0.0;
    for (int j = 0; j < 12; ++j) {
      const cplx zeta = ell.psi(0.95 * unit(0.5 * j)), z = ell.psi(0.8 * unit(0.5 * j + 2.0));
      const cplx a = kernel_W(m0, zeta, z), b = kernel_W(m1, zeta, z);
      worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    o.detail << "W " << sci(worst) << "; ";
    o.require(worst <= 1e-9, "W normalisation independence");
  }
  // expansion invariants on the ellipse
  const Case c = make_case(joukowski(0.25), unit_weight(0.5));
  ExpansionConfig cfg;
  const int n = std::max({6, smallest_admissible(c.pack, 0.75), smallest_admissible(c.pack, 0.9)});
  const ExpansionResult f = expand_thm1(c.pack, cfg, n, {});
  tally(f);
  {
    ExpansionConfig c2 = cfg;
    c2.r = 0.9;
    const ExpansionResult f2 = expand_thm1(c.pack, c2, n, {});
    tally(f2);
    double worst = 0.0;
    bool branches_differ = true;
    for (int j = 0; j < 12; ++j) {
      // annulus for r = 0.75; exterior (first radius) or interior (second) for r = 0.9
      for (double s : {0.5 * (1.0 + 1.0 / 0.75), 0.8}) {
        const cplx z = c.curve.psi(s * unit(0.5 * j + 0.2));
        const auto a = f.evaluate_with_branch(z);
        const auto b = f2.evaluate_with_branch(z);
        branches_differ = branches_differ && a.branch != b.branch;
        worst = std::max(worst, std::abs(a.value - b.value) / std::abs(b.value));
      }
    }
    o.detail << "branches " << sci(worst) << " (limit " << sci(10.0 * cfg.tol) << ")" << "; ";
    o.require(branches_differ, "overlap points fall into different branches");
    o.require(worst <= 10.0 * cfg.tol, "branch agreement");
  }
  {
    const double R = 3.0;
    const int m = 256;
    cplx acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const cplx w = R * unit(node_angle(j, m));
      const cplx z = c.curve.psi(w);
      acc += f.evaluate(z) * c.curve.dpsi(w) * std::pow(z, -n - 1) * w;
    }
    const double mon = std::abs(acc / static_cast<double>(m) - 1.0);
    o.detail << "monicity " << sci(mon) << "; ";
    o.require(mon <= 1e-8, "monicity");
  }
  {
    const WeightFn h = weight_function(WeightSpec::unit());
    const auto P = [&](cplx z) { return f.evaluate(z); };
    const double pn = std::sqrt(inner_product(P, P, c.curve, h, 256).real());
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
      const auto zk = [k](cplx z) { return std::pow(z, k); };
      const double nk = std::sqrt(inner_product(zk, zk, c.curve, h, 256).real());
      worst = std::max(worst, std::abs(inner_product(P, zk, c.curve, h, 256)) / (pn * nk));
    }
    o.detail << "orthogonality " << sci(worst) << "; ";
    o.require(worst <= 1e-7, "orthogonality residuals");
  }
  o.detail << "term bounds: " << total_violations << " violations in " << total_samples << " samples";
  o.require(total_violations == 0 && total_samples > 0, "term bounds at every sample");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria{
      {"exact case", exact_case},        {"oracle equivalence", oracle_equivalence}, {"Szego rate", szego_rate},
      {"gamma_n rate", gamma_rate},      {"algebraic singularity", theorem3},       {"model integral", proposition},
      {"zero distribution", zero_suite}, {"invariants", invariants}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %s: %s (%.1fs) %s\n", i + 1, criteria[i].first, o.ok ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
