#include "test_util.hpp"
#include "thinns/gronwall.hpp"
#include "thinns/initial.hpp"
#include "thinns/operators.hpp"
#include "thinns/solver.hpp"

#include <doctest.h>

using namespace thinns;

namespace {

InequalitySystem sample_system() {
  InequalitySystem s;
  s.c[1] = 0.04;
  s.c[2] = 0.2;
  s.c[3] = 0.15;
  s.c[4] = 2.0;
  s.c[5] = 0.3;
  s.c[6] = 1.5;
  s.c[7] = 0.0;
  s.c[8] = 0.7;
  s.c[9] = 5.0;
  s.c[10] = 0.4;
  s.U = 1.2;
  s.F = 0.5;
  s.eps = 0.1;
  return s;
}

DomainSpec box(int n1, int n2, int n3, double l1 = 1.0, double l2 = 1.0, double nu = 1.0) {
  DomainSpec d;
  d.l1 = l1;
  d.l2 = l2;
  d.nu = nu;
  d.eps = 0.125;
  d.n1 = n1;
  d.n2 = n2;
  d.n3 = n3;
  return d;
}

}  // namespace

TEST_CASE("derived constants") {
  const InequalitySystem s = sample_system();
  const DerivedConstants d = derive_constants(s);
  CHECK(d.c14 == doctest::Approx(2.0 * 0.04).epsilon(1e-15));
  CHECK(d.c13 == 1.0);  // c5 c14 = 0.024 < 1
  CHECK(d.c12 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d.c11 == doctest::Approx(0.08).epsilon(1e-15));  // max(2 c1, c10 c12) = max(0.08, 0.08)
  CHECK(d.b == doctest::Approx(1.0 / (1.5 * 0.0225)).epsilon(1e-15));
  CHECK(d.K == 0.0);
  CHECK(d.c15 == doctest::Approx(std::sqrt(2.0 * (1.0 + 0.7 / d.b))).epsilon(1e-15));
  CHECK(d.c16 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d.c17 == doctest::Approx(std::sqrt(2.0 * 0.7 / d.b)).epsilon(1e-15));
}

TEST_CASE("envelope matches the linear comparison solutions") {
  const InequalitySystem s = sample_system();
  const GronwallEnvelope env = solve_envelope(s, 3.0, 61);
  const DerivedConstants d = env.derived;
  const double U2 = s.U * s.U, F2 = s.F * s.F;
  for (Eigen::Index i = 0; i < env.times.size(); ++i) {
    const double t = env.times[i];
    const double ephi = std::exp(-t / d.c14), epsi = std::exp(-d.b * t), eth = std::exp(-t / d.c12);
    const double phi = U2 * ephi + s.c[5] * d.c14 * F2 * (1.0 - ephi);
    const double psi = U2 * epsi + s.c[8] * F2 * (1.0 - epsi) / d.b;
    const double th = 2.0 * s.c[1] * U2 * eth + s.c[10] * d.c12 * F2 * (1.0 - eth);
    CHECK(env.phi2[i] == doctest::Approx(phi).epsilon(1e-9));
    CHECK(env.psi2[i] == doctest::Approx(psi).epsilon(1e-9));
    CHECK(env.theta2[i] == doctest::Approx(th).epsilon(1e-9));
    // The closed forms dominate the comparison solutions.
    CHECK(env.theta2[i] <= env.theta2_closed[i] * (1.0 + 1e-12));
    CHECK(env.phi2[i] <= env.phi2_closed[i] * (1.0 + 1e-12));
    CHECK(env.psi2[i] <= env.psi2_closed[i] * (1.0 + 1e-9));
  }
  CHECK(env.integral_bound(2.0) == doctest::Approx(5.0 * (2.0 * 0.04 * U2 + 0.4 * F2 * 2.0)));
  CHECK_THROWS_AS(solve_envelope(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_envelope(s, 1.0, 1), std::invalid_argument);
  Eigen::ArrayXd back(2);
  back << 1.0, 0.5;
  CHECK_THROWS_AS(solve_envelope(s, back), std::invalid_argument);
}

TEST_CASE("coupled envelope stays below its closed form") {
  InequalitySystem s = sample_system();
  s.c[7] = 0.05;
  s.U = 0.3;
  s.F = 0.2;
  const GronwallEnvelope env = solve_envelope(s, 5.0, 101);
  for (Eigen::Index i = 0; i < env.times.size(); ++i) {
    CHECK(env.psi2[i] <= env.psi2_closed[i] * (1.0 + 1e-9));
    CHECK(std::sqrt(env.psi2[i]) <= env.psi_bound);
  }
}

TEST_CASE("rk4 on exponential decay") {
  auto rhs = [](double, const Eigen::VectorXd& y) -> Eigen::VectorXd { return -y; };
  Eigen::VectorXd y0(1);
  y0[0] = 1.0;
  const double e1 = std::abs(rk4_integrate(rhs, y0, 0.0, 1.0, 10)[0] - std::exp(-1.0));
  const double e2 = std::abs(rk4_integrate(rhs, y0, 0.0, 1.0, 20)[0] - std::exp(-1.0));
  CHECK(e1 < 1e-6);
  CHECK(std::log2(e1 / e2) == doctest::Approx(4.0).epsilon(0.05));
  CHECK_THROWS_AS(rk4_integrate(rhs, y0, 0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("system validation") {
  InequalitySystem s = sample_system();
  CHECK_NOTHROW(s.validate());
  s.c[3] = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = sample_system();
  s.c[5] = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = sample_system();
  s.regime = Regime::Thm1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);  // c18 unset
  s.c[18] = 2.0;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("a fitted unforced run is contained, an inflated one is not") {
  const DomainSpec d = box(4, 4, 1);
  InitialParams ip;
  ip.amplitude = 0.2;
  const SpectralField u0 = make_initial(d, InitialKind::ZIndependent, ip);
  SolverConfig c;
  c.dt = 5e-4;
  c.t_end = 0.2;
  c.diag_stride = 2;
  const RunResult r = run(u0, ForcingSpec::none(d), c);
  REQUIRE(r.ok());
  const auto reports = check_diff_inequalities(r.series, d.eps, Regime::Thm2);
  const auto& s0 = r.series.samples.front();
  const double U = std::max(s0.phi(Regime::Thm2), s0.psi(Regime::Thm2));
  const InequalitySystem sys = system_from_reports(reports, U, 0.0, d.eps, Regime::Thm2);
  const ContainmentReport rep = check_trajectory(r.series, sys, 1e-6);
  CHECK(rep.contained);
  CHECK(rep.worst_ratio_phi <= 1.0 + 1e-6);
  CHECK(rep.guard_verdict() == "not applicable");

  // The same samples, jumping up after t = 0, escape the decaying envelope.
  DiagnosticSeries grown = r.series;
  for (auto& x : grown.samples) {
    const double g = x.t > 0.0 ? 10.0 : 1.0;
    x.theta *= g;
    x.dr *= g;
    x.ds *= g;
  }
  const ContainmentReport bad = check_trajectory(grown, sys);
  CHECK_FALSE(bad.contained);
  REQUIRE(bad.first_violation_time.has_value());
  CHECK(*bad.first_violation_time == r.series.samples[1].t);
  CHECK(bad.to_json()["contained"] == false);

  InequalitySystem small = sys;
  small.U = 0.5 * U;
  CHECK(check_trajectory(r.series, small).first_violation_time == 0.0);
  DiagnosticSeries forced = r.series;
  forced.samples[1].F = 1.0;
  CHECK_THROWS_AS(check_trajectory(forced, sys), std::invalid_argument);
  CHECK_THROWS_AS(check_trajectory(DiagnosticSeries{}, sys), std::invalid_argument);
}

TEST_CASE("guard trace in the coupled regime") {
  InequalitySystem s = sample_system();
  s.regime = Regime::Thm1;
  s.c[18] = 2.0;
  s.c[19] = 1.0;
  s.U = 2.0;
  s.F = 0.0;
  DiagnosticSeries series;
  for (int i = 0; i < 5; ++i) {
    DiagnosticSample x;
    x.t = 0.1 * i;
    x.dr = 0.1 * (i + 1);
    series.samples.push_back(x);
  }
  // g = c19 eps^1/2 phi with phi = 0.1 (i+1) against 1/c18 = 0.5: sqrt(0.1) * 0.5 < 0.5 never crosses.
  ContainmentReport rep = check_trajectory(series, s);
  CHECK(rep.guard_applicable);
  CHECK(rep.guard_threshold == 0.5);
  CHECK(rep.guard_max == doctest::Approx(std::sqrt(0.1) * 0.5));
  CHECK(rep.guard_verdict() == "never");
  s.c[19] = 5.0;  // g(t_i) = 5 sqrt(0.1) 0.1 (i+1) >= 0.5 first at i = 3
  rep = check_trajectory(series, s);
  REQUIRE(rep.guard_first_crossing.has_value());
  CHECK(*rep.guard_first_crossing == doctest::Approx(0.3));
  CHECK(rep.guard_verdict().rfind("crossed at t=0.3", 0) == 0);
}

TEST_CASE("rescaling to the unit box") {
  std::mt19937_64 rng(6);
  const DomainSpec d = box(4, 3, 2, 2.0, 1.0, 0.5);
  const SpectralField u = random_divfree(d, rng, -1.0, 1e9, false);
  const SpectralField f = random_divfree(d, rng, -1.0, 1e9, false);
  const Rescaled r = rescale(u, f);
  CHECK(r.n == 2);
  CHECK(r.domain.l1 == 1.0);
  CHECK(r.domain.l2 == 1.0);
  CHECK(r.domain.eps == doctest::Approx(0.0625));
  CHECK(r.domain.nu == 1.0);
  CHECK(r.time_factor == doctest::Approx(0.5 / 4.0));
  // Mode (m, k, p) moves to (m, 2k, p) with factor l1/nu.
  CHECK(r.u.coeff(1, 1, 2, 1) == 4.0 * u.coeff(1, 1, 1, 1));
  CHECK(r.u.coeff(1, 1, 1, 1) == Complex(0.0));
  const RescaleIdentityCheck c = check_rescale_identities(u, f);
  CHECK(c.f_rel_err <= 1e-12);
  CHECK(c.du_rel_err <= 1e-12);
  CHECK(c.inverse_err <= 1e-12);
  CHECK(c.h1_ratio != doctest::Approx(1.0));  // the L2 part scales differently when l1 != 1

  SpectralField stray = r.u;
  stray.set_mode(0, 0, 1, 0, Complex(0.1));
  CHECK_THROWS_AS(inverse_rescale(stray, r.f, d), std::invalid_argument);
  const DomainSpec tall = box(3, 3, 1, 1.0, 1.0);
  CHECK_THROWS_AS(inverse_rescale(r.u, r.f, tall.with_modes(5, 5, 1)), std::invalid_argument);
  DomainSpec wide = d;
  wide.l1 = 1.0;
  wide.l2 = 1.0;
  const SpectralField uw = random_divfree(wide, rng, -1.0, 1e9, false);
  const Rescaled same = rescale(uw, uw);
  CHECK(same.n == 1);
}

TEST_CASE("threshold table") {
  ThresholdInput in;
  in.eps = 0.01;
  in.power_log_delta[1] = 0.1;
  in.power_log_delta[2] = 2.0;
  in.c = 4.0;
  const auto rows = literature_thresholds(in);
  CHECK(rows.size() == 11);
  const double lg = std::log(100.0);
  CHECK(rows[0].value == doctest::Approx(std::pow(0.01, 7.0 / 24.0 + 0.1) * lg * lg).epsilon(1e-14));
  CHECK(rows[4].value == doctest::Approx(std::pow(0.01, 1.0 / 6.0) / lg).epsilon(1e-14));
  CHECK(rows[4].formula.find("illustrative") != std::string::npos);
  CHECK(rows[8].value == doctest::Approx(0.25 * 0.1 * std::sqrt(lg)).epsilon(1e-14));
  CHECK(rows.back().value == 0.25);
  in.alpha = [](double e) { return e; };
  CHECK(literature_thresholds(in)[4].value == doctest::Approx(std::pow(0.01, 7.0 / 6.0)).epsilon(1e-14));
  in.eps = 1.0;
  CHECK_THROWS_AS(literature_thresholds(in), std::invalid_argument);
  in.eps = 0.0;
  CHECK_THROWS_AS(literature_thresholds(in), std::invalid_argument);
}

TEST_CASE("anisotropic smallness functional") {
  const DomainSpec d = box(3, 3, 1);
  SpectralField u = SpectralField::zeros(d, 3);
  u.set_mode(0, 0, 1, 1, Complex(0.2));
  const double k = 2.0 * std::numbers::pi * std::sqrt(d.k2(0, 1, 1));
  const double l2 = norm_l2(u);
  // No planar part: the exponential factor is 1.
  CHECK(anisotropic_smallness_functional(u, 3.0) == doctest::Approx(l2 * std::sqrt(1.0 + k)).epsilon(1e-14));
  SpectralField v = u;
  v.set_mode(1, 1, 0, 0, Complex(0.1));
  const double pu = norm_l2(proj_P(v));
  CHECK(anisotropic_smallness_functional(v, 3.0) ==
        doctest::Approx(l2 * std::sqrt(1.0 + k) * std::exp(3.0 * pu * pu / d.eps)).epsilon(1e-13));
}
