#include "test_util.hpp"
#include "thinns/inequality_lab.hpp"
#include "thinns/operators.hpp"

#include <doctest.h>

using namespace thinns;

namespace {

DomainSpec dom(double l1, double l2, double eps, int n1, int n2, int n3) {
  DomainSpec d;
  d.l1 = l1;
  d.l2 = l2;
  d.eps = eps;
  d.n1 = n1;
  d.n2 = n2;
  d.n3 = n3;
  return d;
}

LabOptions opts(int budget, int threads = 1) {
  LabOptions o;
  o.budget = budget;
  o.threads = threads;
  o.seed = 17;
  return o;
}

}  // namespace

TEST_CASE("inequality names") {
  for (const char* s : {"lemma4-inf", "lemma4-4", "lemma6", "poincare", "hausdorff-young"})
    CHECK(to_string(lab_inequality_from_string(s)) == s);
  CHECK_THROWS_AS(lab_inequality_from_string("sobolev"), std::invalid_argument);
  CHECK(eps_power(LabInequality::Lemma4Inf) == 0.5);
  CHECK(eps_power(LabInequality::Lemma4L4) == 0.25);
  CHECK(eps_power(LabInequality::Lemma6) == 0.0);
}

TEST_CASE("planar L4 ratio of a single cosine") {
  // ||cos||_4 = (3/8)^(1/4), ||D^(1/2) cos||_2 = sqrt(pi) on the unit square.
  const DomainSpec d = dom(1, 1, 0.125, 4, 4, 0);
  SpectralField f = SpectralField::zeros(d, 1);
  f.set_mode(0, 1, 0, 0, Complex(0.5, 0.0));
  const double expect = std::pow(3.0 / 8.0, 0.25) / std::sqrt(std::numbers::pi);
  CHECK(expect == doctest::Approx(0.4415).epsilon(1e-4));
  CHECK(lab_ratio(LabInequality::Lemma6, f) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("Poincare: the ground mode is extremal") {
  const DomainSpec d = dom(1.3, 1.0, 0.2, 4, 4, 1);
  const ConstantEstimate e = estimate_constant(LabInequality::Poincare, d, opts(60));
  CHECK(e.max_ratio == doctest::Approx(poincare_constant(d, 1.0)).epsilon(1e-12));
  CHECK(e.max_ratio <= poincare_constant(d, 1.0) * (1.0 + 1e-12));
}

TEST_CASE("Hausdorff-Young at p = 2 is Parseval") {
  std::mt19937_64 rng(8);
  const DomainSpec d = dom(1.3, 1.0, 0.2, 4, 4, 2);
  LabOptions o;
  o.hy_p = 2.0;
  for (int i = 0; i < 20; ++i)
    CHECK(lab_ratio(LabInequality::HausdorffYoung, testutil::random_field(d, 1, rng), o) ==
          doctest::Approx(1.0).epsilon(1e-12));
  o.hy_p = 4.0;
  for (int i = 0; i < 20; ++i) CHECK(lab_ratio(LabInequality::HausdorffYoung, testutil::random_field(d, 1, rng), o) <= 1.0);
}

TEST_CASE("interpolation between derivative norms has constant 1") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const DomainSpec d = dom(1.3, 1.0, 0.2, 3, 3, 1);
  for (int i = 0; i < 1000; ++i) {
    const SpectralField f = testutil::random_field(d, 1, rng);
    const double a = 2.0 * uni(rng), b = 2.0 * uni(rng), th = uni(rng);
    const double lhs = norm_Ds(f, th * a + (1.0 - th) * b);
    const double rhs = std::pow(norm_Ds(f, a), th) * std::pow(norm_Ds(f, b), 1.0 - th);
    CHECK(lhs <= rhs * (1.0 + 1e-12));
  }
  SpectralField g = SpectralField::zeros(d, 1);
  g.set_mode(0, 2, 1, 1, Complex(0.3, 0.4));
  CHECK(norm_Ds(g, 1.0) == doctest::Approx(std::sqrt(norm_Ds(g, 0.5) * norm_Ds(g, 1.5))).epsilon(1e-13));
}

TEST_CASE("sup inequality: estimate reaches the sharp constant") {
  const DomainSpec d = dom(1.0, 1.0, 0.125, 4, 4, 2);
  const double sharp = sup_inequality_sharp_constant(d);
  const ConstantEstimate e = estimate_constant(LabInequality::Lemma4Inf, d, opts(40));
  CHECK(e.max_ratio <= sharp * (1.0 + 1e-12));
  CHECK(e.max_ratio == doctest::Approx(sharp).epsilon(1e-12));
  CHECK(e.normalized_ratio == doctest::Approx(e.max_ratio / std::sqrt(d.eps)));
  // Resolution convergence once the box resolves |k| well beyond 1/eps; the
  // p-tail decays only like 1/n3.
  const double coarse = sup_inequality_sharp_constant(d.with_modes(48, 48, 8));
  const double fine = sup_inequality_sharp_constant(d.with_modes(96, 96, 16));
  CHECK(std::abs(fine / coarse - 1.0) < 0.05);
}

TEST_CASE("estimates are certified, reproducible and thread-independent") {
  const DomainSpec d = dom(1.2, 1.0, 0.125, 4, 4, 2);
  const ConstantEstimate a = estimate_constant(LabInequality::Lemma4L4, d, opts(80, 1));
  const ConstantEstimate b = estimate_constant(LabInequality::Lemma4L4, d, opts(80, 3));
  CHECK(a.max_ratio == b.max_ratio);
  CHECK(relative_difference(a.maximizer, b.maximizer) == 0.0);
  CHECK(a.evaluations <= 80);
  CHECK(a.max_ratio >= a.ratio_before_refinement);
  CHECK(lab_ratio(LabInequality::Lemma4L4, a.maximizer) == doctest::Approx(a.max_ratio).epsilon(1e-14));
  CHECK(norm_l2(proj_P(a.maximizer)) == 0.0);
  int trials = 0;
  for (const auto& e : a.ensembles) trials += e.trials;
  CHECK(trials == a.trials);
  const auto j = a.to_json();
  CHECK(j["inequality"] == "lemma4-4");
  CHECK(j["ensembles"].size() == a.ensembles.size());
}

TEST_CASE("estimate_constant input errors") {
  const DomainSpec d3 = dom(1, 1, 0.125, 3, 3, 1);
  CHECK_THROWS_AS(estimate_constant(LabInequality::Poincare, d3, opts(0)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_constant(LabInequality::Lemma6, d3, opts(10)), std::invalid_argument);
  const DomainSpec d2 = dom(1, 1, 0.125, 3, 3, 0);
  CHECK_THROWS_AS(estimate_constant(LabInequality::Lemma4Inf, d2, opts(10)), std::invalid_argument);
}

TEST_CASE("scaling fit recovers exact power laws") {
  const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
  std::vector<double> r;
  for (double e : eps) r.push_back(3.0 * std::pow(e, 0.37));
  const ScalingFit f = fit_eps_scaling(eps, r);
  CHECK(f.slope == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.slope_stderr < 1e-12);
  CHECK_THROWS_AS(fit_eps_scaling({0.1, 0.2}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_eps_scaling({0.1, 0.2, 0.3}, {1.0, 0.0, 2.0}), std::invalid_argument);
}

TEST_CASE("a fixed single thin mode scales with its own exponent") {
  // w = cos(2 pi z / eps): sup/||D^2 w|| ~ eps^(3/2) and ||w||_4/||D w|| ~ eps^(3/4).
  std::vector<double> eps, rinf, r4;
  for (int j = 2; j <= 6; ++j) {
    const double e = std::ldexp(1.0, -j);
    const DomainSpec d = dom(1.5, 1.5, e, 2, 2, 1);
    SpectralField w = SpectralField::zeros(d, 1);
    w.set_mode(0, 0, 0, 1, Complex(0.5, 0.0));
    eps.push_back(e);
    rinf.push_back(lab_ratio(LabInequality::Lemma4Inf, w));
    r4.push_back(lab_ratio(LabInequality::Lemma4L4, w));
  }
  CHECK(fit_eps_scaling(eps, rinf).slope == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(fit_eps_scaling(eps, r4).slope == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("sweep domains scale the in-plane cutoff with 1/eps") {
  const DomainSpec d = sweep_domain(1.5, 0.0625, 2.0, 2);
  CHECK(d.n1 == 48);
  CHECK(d.n2 == 48);
  CHECK(d.n3 == 2);
  CHECK(d.eps == 0.0625);
}

TEST_CASE("dyadic blocks") {
  const DomainSpec d = dom(1, 1, 0.125, 6, 6, 0);
  SpectralField f = SpectralField::zeros(d, 1);
  f.set_mode(0, 1, 0, 0, Complex(0.3, 0.4));
  DyadicProfile p = dyadic_decompose(f);
  REQUIRE(p.A.size() == 1);
  CHECK(p.A[0] == doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-15));

  SpectralField g = SpectralField::zeros(d, 1);
  g.set_mode(0, 2, 0, 0, Complex(1.0));
  g.set_mode(0, 2, 2, 0, Complex(0.5));
  g.set_mode(0, 3, -1, 0, Complex(0.25));
  p = dyadic_decompose(g);
  REQUIRE(p.A.size() == 2);
  CHECK(p.A[0] == 0.0);
  CHECK(p.A[1] > 0.0);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const SpectralField h = testutil::random_field(d, 1, rng);
    p = dyadic_decompose(h);
    CHECK(p.block_energy == doctest::Approx(p.mode_energy).epsilon(1e-14));
    CHECK(p.mode_energy == doctest::Approx(std::pow(norm_l2(h), 2) / d.volume()).epsilon(1e-13));
    CHECK(p.bound_holds());
    CHECK(p.multiplier_constant == doctest::Approx(1.0 / (2.0 * std::numbers::pi)));
  }
  CHECK_THROWS_AS(dyadic_decompose(testutil::random_field(dom(1, 1, 0.125, 3, 3, 1), 1, rng)),
                  std::invalid_argument);
}
