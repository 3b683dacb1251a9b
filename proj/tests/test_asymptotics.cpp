#include <catch_amalgamated.hpp>

#include <random>

#include "curveortho/asymptotics.hpp"
#include "curveortho/oracle.hpp"

using namespace curveortho;
using Catch::Approx;

namespace {

CurveSpec joukowski(double c) {
  CurveSpec s;
  s.cneg = {c};
  return s;
}

SzegoPack pack_for(const Curve& c, const WeightSpec& w, cplx z0 = 0.0) {
  return build_szego_pack(fit_interior_map(c, z0), w);
}

WeightSpec half_at(std::vector<SingularPoint> pts, std::optional<double> sigma = std::nullopt) {
  return WeightSpec::singular(LaurentSeries::constant(1.0), std::move(pts), sigma);
}

}  // namespace

TEST_CASE("generalised binomial coefficient") {
  CHECK(binom_general(5, 2) == 10.0);
  CHECK(binom_general(17, 0) == 1.0);
  CHECK(binom_general(4, 7) == 0.0);
  CHECK(binom_general(10, -0.5) == Approx(std::tgamma(11.0) / (std::tgamma(0.5) * std::tgamma(11.5))).epsilon(1e-13));
  CHECK(binom_general(10, -0.5) == Approx(0.172053).margin(1e-6));
  CHECK(binom_general(0.5, 2.0) == Approx(-0.125).epsilon(1e-13));
  CHECK_THROWS_AS(binom_general(-3.0, 0.5), Error);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ua(0.0, 25.0), ub(-0.9, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double a = ua(rng), b = ub(rng) * a;
    if (is_nonpositive_integer(b + 1.0) || is_nonpositive_integer(a - b + 1.0)) continue;
    const double lhs = binom_general(a, b) * std::tgamma(b + 1.0) * std::tgamma(a - b + 1.0);
    worst = std::max(worst, std::abs(lhs / std::tgamma(a + 1.0) - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("alpha constants") {
  const Curve circle = make_curve(CurveSpec{});
  {
    const SzegoPack p = pack_for(circle, half_at({{0.5, 0.5}}));
    const SingularityData sd = alpha_constants(p);
    CHECK(std::abs(sd.points[0].alpha - 1.0) < 1e-12);
    CHECK(std::abs(sd.points[0].alpha_limit - sd.points[0].alpha) < 1e-8);
    CHECK(sd.u == 1);
  }
  {
    const SzegoPack p = pack_for(circle, half_at({{0.5, 1.5}}));
    CHECK(std::abs(alpha_constants(p).points[0].alpha - 1.0) < 1e-12);
  }
  {
    const SzegoPack p = pack_for(circle, half_at({{0.5, 0.5}, {-0.5, 0.5}}));
    const SingularityData sd = alpha_constants(p);
    CHECK(sd.u == 2);
    CHECK(std::abs(sd.points[0].alpha - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(sd.points[1].alpha - 1.0 / std::sqrt(2.0)) < 1e-12);
    for (const auto& q : sd.points) CHECK(std::abs(q.alpha_limit - q.alpha) < 1e-8);
  }
  {
    // non-circular curve: the audit must agree off the real axis as well
    const Curve e = make_curve(joukowski(0.25));
    const SzegoPack p = pack_for(e, half_at({{e.psi(0.7 * unit(1.1)), 0.5}, {e.psi(0.7 * unit(-2.0)), -0.5}}));
    const SingularityData sd = alpha_constants(p);
    for (const auto& q : sd.points) {
      CHECK(std::abs(q.alpha_limit - q.alpha) < 1e-8 * std::abs(q.alpha));
      CHECK(std::abs(q.phi_prime * e.dpsi(q.rho_k) - 1.0) < 1e-13);
    }
  }
  CHECK_THROWS_AS(alpha_constants(pack_for(circle, WeightSpec::generic(LaurentSeries::constant(1.0), 0.0))), Error);
}

TEST_CASE("exterior Szego formula and the leading coefficient") {
  const Curve circle = make_curve(CurveSpec{});
  const SzegoPack unit_pack = pack_for(circle, WeightSpec::generic(LaurentSeries::constant(1.0), 0.0));
  for (cplx z : {cplx(1.5, 0.2), cplx(-3.0, 1.0)})
    CHECK(std::abs(szego_exterior_formula(unit_pack, 7, z) - std::pow(z, 7)) < 1e-12 * std::abs(std::pow(z, 7)));
  CHECK(gamma_asymptotic(unit_pack, 12) == Approx(1.0).epsilon(1e-14));

  const SzegoPack shifted = pack_for(circle, WeightSpec::generic(LaurentSeries{{-0.5, 1.0}, {}}, 0.5));
  CHECK(std::abs(szego_exterior_formula(shifted, 3, 2.0) - 32.0 / 3.0) < 1e-12);
  CHECK(gamma_asymptotic(shifted, 5) == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(szego_exterior_formula(shifted, 3, 0.4), Error);

  const Curve e = make_curve(joukowski(0.25));
  const SzegoPack ep = pack_for(e, WeightSpec::generic(LaurentSeries::constant(1.0), 0.5));
  CHECK(gamma_asymptotic(ep, 10) == Approx(ep.delta_e_inf()).epsilon(1e-14));
  const WeightFn h = weight_function(WeightSpec::unit());
  const cplx z = e.psi(1.5);
  double prev = 1.0;
  for (int n : {4, 8, 12, 16}) {
    const PolyCoeffs p = monic_orthogonal(e, h, n);
    const double err = std::abs(szego_exterior_formula(ep, n, z) / p(z) - 1.0);
    CHECK(err < prev);
    prev = err;
    CHECK(std::abs(gamma_asymptotic(ep, n) / p.gamma - 1.0) < 0.1);
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("interior contour representation") {
  const Curve circle = make_curve(CurveSpec{});
  const SzegoPack unit_pack = pack_for(circle, WeightSpec::generic(LaurentSeries::constant(1.0), 0.0));
  CHECK(std::abs(interior_integral_rep(unit_pack, 4, 0.2) - 0.0016) < 1e-15);
  for (int n : {0, 3, 9}) {
    const cplx z(0.3, -0.5);
    CHECK(std::abs(interior_integral_rep(unit_pack, n, z) - std::pow(z, n)) < 1e-14);
  }

  const SzegoPack shifted = pack_for(circle, WeightSpec::generic(LaurentSeries{{-0.5, 1.0}, {}}, 0.5));
  const WeightFn h = weight_function(WeightSpec::generic(LaurentSeries{{-0.5, 1.0}, {}}));
  const PolyCoeffs p1 = monic_orthogonal(circle, h, 1);
  CHECK(std::abs(interior_integral_rep(shifted, 1, 0.0) - p1(0.0)) < 0.1);
  // error O(r1^n r^{2n}) against the oracle
  double prev = 1.0;
  for (int n : {4, 8, 12}) {
    const PolyCoeffs p = monic_orthogonal(circle, h, n);
    const cplx z(0.1, 0.2);
    const double err = std::abs(interior_integral_rep(shifted, n, z) - p(z));
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("main terms for an algebraic singularity on the circle") {
  const Curve circle = make_curve(CurveSpec{});
  const SzegoPack p = pack_for(circle, half_at({{0.5, 0.5}}, 0.3));
  const SingularityData sd = alpha_constants(p);

  const int n = 12;
  const SingularTerms t = thm3_interior(p, sd, n, -0.25);
  CHECK(t.region == SingularRegion::Inner);
  CHECK(t.region_term == cplx(0.0));
  const cplx di = [](cplx z) { return std::sqrt(1.0 - 0.5 * z); }(-0.25);
  const cplx expect = binom_general(n, -0.5) / di * std::sqrt(0.75) * (1.0 / 0.75) * std::pow(0.5, n + 1);
  CHECK(std::abs(t.main_term - expect) < 1e-12 * std::abs(expect));
  CHECK(t.scale == Approx(std::abs(binom_general(n, -0.5)) * std::pow(0.5, n)).epsilon(1e-13));

  CHECK(std::abs(thm3_at_singularity(p, sd, 20, 0) - binom_general(20, 0.5) * std::pow(0.5, 20)) < 1e-14);
  CHECK_THROWS_AS(thm3_at_singularity(p, sd, 20, 1), Error);
  CHECK_THROWS_AS(thm3_interior(p, sd, n, cplx(0.4, 0.0)), Error);  // on the cut
  CHECK_THROWS_AS(thm3_interior(p, sd, n, 1.5), Error);

  // against the oracle at a point of G_1 cap Sigma_sigma
  const WeightFn h = weight_function(p.weight());
  double first = 0.0, last = 0.0;
  for (int m : {10, 20, 30}) {
    const PolyCoeffs q = monic_orthogonal(circle, h, m);
    const cplx z(0.0, 0.8);
    const SingularTerms v = thm3_interior(p, sd, m, z);
    CHECK(v.region == SingularRegion::Outer);
    const double r = std::abs(q(z) - v.value) / v.scale;
    if (m == 10) first = r;
    last = r;
  }
  CHECK(last < first);

  const SzegoPack two = pack_for(circle, half_at({{0.5, 0.5}, {-0.5, 0.5}}));
  const SingularityData s2 = alpha_constants(two);
  const int m = 10;
  const cplx b = binom_general(m, 0.5) * s2.points[0].alpha * std::pow(0.5, m);
  const cplx cross = binom_general(m, -0.5) / s2.points[0].delta_i_a * s2.points[1].alpha * s2.points[1].delta_i_a * (-1.0) *
                     std::pow(cplx(-0.5), m + 1);
  CHECK(std::abs(thm3_at_singularity(two, s2, m, 0) - (b + cross)) < 1e-13);

  const SzegoPack generic = pack_for(circle, WeightSpec::generic(LaurentSeries::constant(1.0), 0.0));
  CHECK_THROWS_AS(thm3_interior(generic, sd, n, 0.1), Error);
}

TEST_CASE("model integral with an algebraic branch point") {
  const auto one = [](cplx) { return cplx(1.0); };
  const auto lin = [](cplx t) { return 1.0 + t; };
  CHECK(std::abs(proposition_I(one, 1.0, 0.5, 0.1, 3, PropositionMode::Quadrature) - 0.125) < 1e-15);
  CHECK(std::abs(proposition_I(lin, 1.0, 0.5, 0.2, 6, PropositionMode::Quadrature) - 1.5 * std::pow(0.5, 6)) < 1e-15);
  CHECK(std::abs(proposition_I(one, 2.0, 0.5, 0.1, 4, PropositionMode::Quadrature) - 0.5) < 1e-12);
  CHECK(std::abs(proposition_I(one, 2.0, 0.5, 0.1, 4, PropositionMode::Asymptotic) - 0.5) < 1e-12);
  CHECK_THROWS_AS(proposition_I(one, -1.0, 0.5, 0.1, 4, PropositionMode::Quadrature), Error);

  double prev = 1.0;
  for (int n : {10, 20, 40, 80}) {
    const cplx q = proposition_I(one, 0.5, 0.5, 0.1, n, PropositionMode::Quadrature);
    const cplx a = proposition_I(one, 0.5, 0.5, 0.1, n, PropositionMode::Asymptotic);
    const double rel = std::abs(q - a) / std::abs(a);
    CHECK(rel < prev);
    prev = rel;
  }
}
