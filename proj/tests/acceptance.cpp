// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [criterion numbers...]

#include "test_util.hpp"
#include "thinns/diagnostics.hpp"
#include "thinns/gronwall.hpp"
#include "thinns/inequality_lab.hpp"
#include "thinns/initial.hpp"
#include "thinns/operators.hpp"
#include "thinns/solver.hpp"
#include "thinns/transform.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace thinns;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

DomainSpec box(int n1, int n2, int n3, double eps = 0.125, double nu = 1.0, double l1 = 1.0, double l2 = 1.0) {
  DomainSpec d;
  d.l1 = l1;
  d.l2 = l2;
  d.eps = eps;
  d.nu = nu;
  d.n1 = n1;
  d.n2 = n2;
  d.n3 = n3;
  return d;
}

SolverConfig solver(Scheme s, double dt, double t_end, int stride) {
  SolverConfig c;
  c.scheme = s;
  c.dt = dt;
  c.t_end = t_end;
  c.diag_stride = stride;
  return c;
}

// Runs that did not blow up, replayed at dt/2 by the quadrature criterion.
struct RecordedRun {
  std::string name;
  SpectralField u0;
  ForcingSpec forcing;
  SolverConfig cfg;
  double h2_integral;
};
std::vector<RecordedRun> recorded;

RunResult run_recorded(const std::string& name, const SpectralField& u0, const ForcingSpec& f, const SolverConfig& c) {
  RunResult r = run(u0, f, c);
  if (r.ok()) recorded.push_back({name, u0, f, c, h2_squared_integral(r.series)});
  return r;
}

// Planar divergence-free (u1, u2, 0) from a random stream function.
SpectralField random_planar_flow(const DomainSpec& d, std::mt19937_64& rng) {
  const SpectralField psi = testutil::random_field(d, 1, rng, true);
  SpectralField r = SpectralField::zeros(d, 3);
  const SpectralField dy = partial(psi, 1), dx = partial(psi, 0);
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    if (p != 0 || idx >= d.mode_count() / 2) return;
    r.set_mode(0, m, n, p, dy.at(0, idx));
    r.set_mode(1, m, n, p, -dx.at(0, idx));
  });
  return r;
}

// 1 -----------------------------------------------------------------------
Outcome operator_algebra() {
  Outcome o;
  std::mt19937_64 rng(101);
  const DomainSpec d = box(16, 16, 4);
  double leray_idem = 0, pq_sum = 0, pq = 0, div = 0;
  for (int i = 0; i < 100; ++i) {
    const SpectralField f = testutil::random_field(d, 3, rng);
    const SpectralField lf = leray(f);
    const double nf = norm_l2(f);
    leray_idem = std::max(leray_idem, norm_l2(leray(lf) - lf) / nf);
    pq_sum = std::max(pq_sum, norm_l2(proj_P(f) + proj_Q(f) - f) / nf);
    pq = std::max(pq, norm_l2(proj_P(proj_Q(f))) / nf);
    div = std::max(div, max_relative_divergence(lf));
  }
  o.detail << "100 fields, modes |m|,|n|<=16, |p|<=4: |LLf-Lf| " << leray_idem << ", |(P+Q)f-f| " << pq_sum
           << ", |PQf| " << pq << ", div Lf " << div;
  o.require(std::max({leray_idem, pq_sum, pq, div}) <= 1e-12, "all <= 1e-12");
  return o;
}

// 2 -----------------------------------------------------------------------
Outcome parseval_roundtrip() {
  Outcome o;
  std::mt19937_64 rng(202);
  double parseval = 0, round = 0, direct = 0;
  for (const DomainSpec& d : {box(16, 16, 4), box(7, 5, 2, 0.2, 1.0, 1.3, 1.0)}) {
    for (int i = 0; i < 10; ++i) {
      const SpectralField f = testutil::random_field(d, 3, rng);
      const double nf = norm_l2(f);
      parseval = std::max(parseval, std::abs(testutil::l2_direct(f) - nf) / nf);
      for (const GridShape& g : {minimal_grid(d), dealiased_grid(d)}) {
        const PhysicalField u = to_physical(f, g);
        parseval = std::max(parseval, std::abs(quadrature_lp_norm(u, 2.0) - nf) / nf);
        round = std::max(round, relative_difference(to_spectral(u, d), f));
      }
    }
  }
  // Point values against the direct Fourier sum on a small box.
  const DomainSpec s = box(5, 4, 2, 0.2, 1.0, 1.3, 1.0);
  const SpectralField f = testutil::random_field(s, 3, rng);
  const PhysicalField u = to_physical(f, minimal_grid(s));
  const double scale = u.values.abs().maxCoeff();
  for (std::size_t row = 0; row < u.grid.points(); row += 7) {
    const Eigen::Vector3d x = u.position(row);
    for (int j = 0; j < 3; ++j)
      direct = std::max(direct, std::abs(u.values(static_cast<Eigen::Index>(row), j) -
                                         testutil::eval_at(f, j, x[0], x[1], x[2])) / scale);
  }
  o.detail << "Parseval " << parseval << ", round trip " << round << ", vs direct sum " << direct;
  o.require(std::max({parseval, round, direct}) <= 1e-12, "all <= 1e-12");
  return o;
}

// 3 -----------------------------------------------------------------------
Outcome single_mode_decay() {
  Outcome o;
  const DomainSpec d = box(3, 3, 1, 0.125, 0.02);
  double worst = 0.0;
  for (auto [n, p] : {std::pair{1, 0}, std::pair{1, 1}}) {
    SpectralField u0 = SpectralField::zeros(d, 3);
    const Complex a(0.2, -0.1);
    u0.set_mode(0, 0, n, p, a);
    const Complex exact = a * std::exp(-d.nu * kTwoPi * kTwoPi * d.k2(0, n, p));
    for (Scheme s : {Scheme::EtdRk2, Scheme::EtdRk4, Scheme::ImexCn}) {
      if (p != 0 && s == Scheme::ImexCn) continue;  // stiff thin mode: CN is only A-stable
      const RunResult r = run_recorded("single mode " + to_string(s), u0, ForcingSpec::none(d),
                                       solver(s, 1e-3, 1.0, 100));
      const double err = std::abs(r.final_state.u.coeff(0, 0, n, p) - exact) / std::abs(exact);
      worst = std::max(worst, err);
    }
  }
  o.detail << "max relative error at t=1, dt=1e-3: " << worst;
  o.require(worst <= 1e-6, "relative error <= 1e-6");

  // Order: CN on the exact mode, ETD schemes on a nonlinear run.
  SpectralField u0 = SpectralField::zeros(d, 3);
  u0.set_mode(0, 0, 1, 0, Complex(0.2, -0.1));
  auto cn_err = [&](double dt) {
    const RunResult r = run(u0, ForcingSpec::none(d), solver(Scheme::ImexCn, dt, 1.0, 1000000));
    return std::abs(r.final_state.u.coeff(0, 0, 1, 0) -
                    Complex(0.2, -0.1) * std::exp(-d.nu * kTwoPi * kTwoPi));
  };
  const double cn_order = std::log2(cn_err(2e-2) / cn_err(1e-2));
  o.detail << "; observed orders: imex-cn " << cn_order;
  o.require(std::abs(cn_order - 2.0) <= 0.2, "imex-cn order 2 +- 0.2");

  const DomainSpec dn = box(4, 4, 1, 0.125, 0.01);
  InitialParams ip;
  ip.amplitude = 1.0;
  ip.seed = 5;
  const SpectralField v0 = make_initial(dn, InitialKind::QPerturbed, ip);
  for (Scheme s : {Scheme::EtdRk2, Scheme::EtdRk4}) {
    auto fin = [&](double dt) { return run(v0, ForcingSpec::none(dn), solver(s, dt, 0.1, 1000000)).final_state.u; };
    const SpectralField a = fin(1e-2), b = fin(5e-3), c = fin(2.5e-3);
    const double order = std::log2(norm_l2(a - b) / norm_l2(b - c));
    o.detail << ", " << to_string(s) << " " << order;
    o.require(std::abs(order - scheme_order(s)) <= 0.2, to_string(s) + " order +- 0.2");
  }
  return o;
}

// 4 -----------------------------------------------------------------------
Outcome energy_identity() {
  Outcome o;
  const DomainSpec d = box(6, 6, 2, 0.125, 0.01);
  InitialParams ip;
  ip.amplitude = 1.0;
  ip.seed = 7;
  const SpectralField u0 = make_initial(d, InitialKind::QPerturbed, ip);
  SolverConfig c = solver(Scheme::EtdRk4, 1e-3, 0.5, 1);
  c.dealias = true;
  const RunResult r = run_recorded("energy identity", u0, ForcingSpec::none(d), c);
  o.require(r.ok(), "run completed");
  const Eigen::ArrayXd res = energy_budget_residuals(r.series, d.nu);
  o.detail << res.size() << " intervals, max |d theta^2/dt + 2 nu |Du|^2| / (nu |Du|^2) = " << res.maxCoeff();
  o.require(res.maxCoeff() <= 1e-6, "<= 1e-6");
  return o;
}

// 5 -----------------------------------------------------------------------
Outcome enstrophy_miracle() {
  Outcome o;
  std::mt19937_64 rng(505);
  const DomainSpec d = box(10, 10, 0, 0.125, 1.0, 1.4, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) worst = std::max(worst, std::abs(check_enstrophy_miracle(random_planar_flow(d, rng))));
  // r = (a sin(2 pi y), 0, 0), s = (0, 0, cos X + cos(X + Y)).
  const DomainSpec u = box(2, 2, 0);
  SpectralField r = SpectralField::zeros(u, 3), s = SpectralField::zeros(u, 3);
  r.set_mode(0, 0, 1, 0, Complex(0.0, -0.4));
  s.set_mode(2, 1, 0, 0, Complex(0.5, 0.0));
  s.set_mode(2, 1, 1, 0, Complex(0.5, 0.0));
  const double counter = std::abs(s_advection_residual(r, s));
  o.detail << "max normalised residual over 50 planar flows " << worst << "; s-advection counterexample " << counter;
  o.require(worst <= 1e-10, "planar residual <= 1e-10");
  o.require(counter >= 1e-2, "counterexample >= 1e-2");
  return o;
}

// 6 -----------------------------------------------------------------------
Outcome planar_closure() {
  Outcome o;
  const DomainSpec d = box(8, 8, 2, 0.125, 0.1);
  InitialParams ip;
  ip.amplitude = 0.5;
  ip.seed = 6;
  const SpectralField u0 = make_initial(d, InitialKind::ZIndependent, ip);
  std::mt19937_64 rng(606);
  SpectralField prof = random_divfree(d, rng, -2.0, 3.0, true);
  prof *= 0.5 / norm_l2(prof);
  const ForcingSpec f(prof, Modulation{});
  const RunResult r = run_recorded("planar closure", u0, f, solver(Scheme::EtdRk4, 2e-3, 5.0, 10));
  o.require(r.ok(), "run completed");
  // ||w||_2 <= (eps / 2 pi) ||Dw||_2 for thin modes, so ||Qu||_H1 <= sqrt(1 + (eps/2pi)^2) ||Dw||.
  const double poinc = std::sqrt(1.0 + std::pow(d.eps / kTwoPi, 2));
  double worst = 0.0;
  for (const auto& s : r.series.samples) worst = std::max(worst, poinc * s.dw / s.h1);
  const SpectralField& uf = r.final_state.u;
  const double final_ratio = norm_h1(proj_Q(uf)) / norm_h1(uf);
  o.detail << r.series.size() << " samples on [0, " << r.final_state.t << "], max |Qu|_H1/|u|_H1 " << worst
           << ", at t_end " << final_ratio << ", |u(t_end)|_H1 " << norm_h1(uf);
  o.require(std::max(worst, final_ratio) <= 1e-10, "<= 1e-10");
  o.require(r.final_state.t >= 5.0 - 1e-9, "reached t = 5");
  return o;
}

// 7 -----------------------------------------------------------------------
Outcome thin_scaling() {
  Outcome o;
  const std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  for (auto [k, want] : {std::pair{LabInequality::Lemma4Inf, 0.5}, std::pair{LabInequality::Lemma4L4, 0.25}}) {
    std::vector<double> ratios;
    for (double e : eps) {
      LabOptions lo;
      lo.budget = 40;
      lo.seed = 7;
      ratios.push_back(estimate_constant(k, sweep_domain(1.5, e, 2.0, 2), lo).max_ratio);
    }
    const ScalingFit fit = fit_eps_scaling(eps, ratios);
    o.detail << to_string(k) << " slope " << fit.slope << " (want " << want << "); ";
    o.require(std::abs(fit.slope - want) <= 0.1, to_string(k) + " slope within 0.1");
  }
  return o;
}

// 8 -----------------------------------------------------------------------
Outcome planar_l4_constant() {
  Outcome o;
  const double floor = std::pow(3.0 / 8.0, 0.25) / std::sqrt(std::numbers::pi);
  std::vector<double> est;
  for (int n : {32, 64}) {
    LabOptions lo;
    lo.budget = 1400;
    lo.seed = 8;
    const ConstantEstimate e = estimate_constant(LabInequality::Lemma6, box(n, n, 0), lo);
    o.detail << "modes " << 2 * n << "^2: " << e.max_ratio << " from " << e.trials << " trials; ";
    o.require(e.trials >= 1000, ">= 1000 trials");
    o.require(std::isfinite(e.max_ratio), "finite");
    o.require(e.max_ratio >= floor, "above single-mode floor");
    est.push_back(e.max_ratio);
  }
  const double change = std::abs(est[1] / est[0] - 1.0);
  o.detail << "floor " << floor << ", change " << 100.0 * change << "%";
  o.require(change <= 0.05, "resolution change <= 5%");
  return o;
}

// 9 and 10 share their trajectories ----------------------------------------

struct VerifySet {
  Regime regime;
  std::vector<RunResult> runs;
  std::vector<bool> forced;
  std::vector<InequalityReport> reports;
  InequalitySystem sys;
  double M = 0.0;
};

VerifySet verify_set(Regime g) {
  VerifySet v;
  v.regime = g;
  const DomainSpec d = box(4, 4, 1, 0.125, 1.0);
  std::vector<DiagnosticSeries> series;
  double U = 0.0, F = 0.0;
  for (int i = 0; i < 5; ++i) {
    InitialParams ip;
    ip.amplitude = 0.1;
    ip.seed = 900 + static_cast<std::uint64_t>(i);
    const SpectralField u0 = make_initial(d, g == Regime::Thm2 ? InitialKind::ZIndependent : InitialKind::QPerturbed, ip);
    ForcingSpec f = ForcingSpec::none(d);
    const bool forced = i >= 3;
    if (forced) {
      std::mt19937_64 rng(ip.seed);
      SpectralField prof = random_divfree(d, rng, -2.0, 2.0, g == Regime::Thm2);
      prof *= 0.05 / norm_l2(prof);
      f = ForcingSpec(prof, Modulation{});
    }
    const std::string name = std::string(g == Regime::Thm2 ? "planar" : "thin") + " trajectory " + std::to_string(i);
    // The thin part decays at 2 nu (2 pi / eps)^2 ~ 5e3: an initial layer sampled
    // every 2e-5 keeps the difference stencils accurate, then coarser steps.
    constexpr double layer = 0.01;
    RunResult a = run_recorded(name + " (layer)", u0, f, solver(Scheme::EtdRk4, 2e-5, layer, 1));
    const RunResult b = run_recorded(name, a.final_state.u, f, solver(Scheme::EtdRk4, 2e-4, 0.3 - layer, 1));
    for (std::size_t k = 1; k < b.series.size(); ++k) {
      DiagnosticSample x = b.series.samples[k];
      x.t += layer;
      a.series.samples.push_back(x);
    }
    a.final_state = b.final_state;
    a.final_state.t += layer;
    v.runs.push_back(std::move(a));
    v.forced.push_back(forced);
    const auto& s0 = v.runs.back().series.samples.front();
    U = std::max({U, s0.phi(g), s0.psi(g)});
    F = std::max(F, f.bound());
    series.push_back(v.runs.back().series);
  }
  v.M = std::max(U, F);
  v.reports = check_diff_inequalities(series, d.eps, g);
  v.sys = system_from_reports(v.reports, U, F, d.eps, g);
  return v;
}

std::vector<VerifySet>& verify_sets() {
  static std::vector<VerifySet> sets;
  if (sets.empty()) {
    sets.push_back(verify_set(Regime::Thm2));
    sets.push_back(verify_set(Regime::Thm1));
  }
  return sets;
}

Outcome inequality_verdicts() {
  Outcome o;
  for (const VerifySet& v : verify_sets()) {
    bool nonneg = true, pass = true;
    double worst = 0.0;
    for (const auto& r : v.reports) {
      for (double k : r.fitted_constants) nonneg = nonneg && k >= 0.0;
      pass = pass && r.pass;
      worst = std::max(worst, r.slack > 0.0 ? r.residual_max / r.slack : 0.0);
      if (!r.pass) o.detail << to_string(v.regime) << ":" << r.name << " failed (" << r.residual_max << " > " << r.slack << "); ";
      if (std::getenv("ACCEPTANCE_VERBOSE")) {
        o.detail << "\n    " << r.name << ":";
        for (std::size_t j = 0; j < r.fitted_constants.size(); ++j)
          o.detail << " " << r.constant_names[j] << "=" << r.fitted_constants[j];
      }
    }
    bool q_initial = v.regime == Regime::Thm2;
    if (v.regime == Regime::Thm1)
      for (const auto& r : v.runs) q_initial = q_initial || r.series.samples.front().dw > 0.0;
    o.detail << (std::getenv("ACCEPTANCE_VERBOSE") ? "\n  " : "") << to_string(v.regime) << ": " << v.reports.size() << " rows on 5 runs, M " << v.M
             << ", worst residual/slack " << worst << "; ";
    o.require(v.M <= 0.1, "M <= 0.1");
    o.require(nonneg, "nonnegative constants");
    o.require(pass, "all rows within slack");
    o.require(q_initial, "thin part present initially");
  }
  return o;
}

Outcome gronwall_containment() {
  Outcome o;
  for (const VerifySet& v : verify_sets()) {
    double worst = 0.0, tail = 0.0;
    bool contained = true, guard_never = true;
    for (std::size_t i = 0; i < v.runs.size(); ++i) {
      const ContainmentReport c = check_trajectory(v.runs[i].series, v.sys, 1e-6);
      contained = contained && c.contained;
      worst = std::max({worst, c.worst_ratio_theta, c.worst_ratio_phi, c.worst_ratio_psi});
      if (c.guard_applicable) {
        guard_never = guard_never && !c.guard_first_crossing;
        if (c.guard_first_crossing)
          o.detail << "guard " << c.guard_max << " vs " << c.guard_threshold << " " << c.guard_verdict() << "; ";
      }
      if (!c.contained)
        o.detail << to_string(v.regime) << " run " << i << " leaves the envelope at t=" << *c.first_violation_time
                 << " (" << c.first_violation_quantity << "); ";
      if (!v.forced[i]) {
        BoundsInput bi;
        bi.U = v.M;
        tail = std::max(tail, evaluate_theorem_bounds(v.runs[i].series, bi).tail_sup_h1);
      }
    }
    o.detail << to_string(v.regime) << ": worst ratio to envelope " << worst << ", guard "
             << (v.regime == Regime::Thm1 ? (guard_never ? "never crosses" : "crosses") : "n/a")
             << ", unforced tail sup |u|_H1 " << tail << "; ";
    o.require(contained, "contained");
    o.require(guard_never, "guard never crosses");
    o.require(tail <= 1e-3, "unforced tail sup <= 1e-3");
  }
  return o;
}

// 11 ----------------------------------------------------------------------
Outcome rescaling() {
  Outcome o;
  std::mt19937_64 rng(1111);
  const DomainSpec d = box(6, 4, 2, 0.125, 0.5, 2.0, 1.0);
  double f_err = 0, du_err = 0, inv = 0, h1_ratio = 0;
  for (int i = 0; i < 10; ++i) {
    const SpectralField u = random_divfree(d, rng, -1.0, 1e9, false);
    const SpectralField f = random_divfree(d, rng, -1.0, 1e9, false);
    const RescaleIdentityCheck c = check_rescale_identities(u, f);
    f_err = std::max(f_err, c.f_rel_err);
    du_err = std::max(du_err, c.du_rel_err);
    inv = std::max(inv, c.inverse_err);
    h1_ratio = c.h1_ratio;
  }
  o.detail << "l1=2, l2=1, nu=1/2: |f| identity " << f_err << ", |Du| identity " << du_err << ", inverse " << inv
           << " (full H1 ratio " << h1_ratio << ")";
  o.require(std::max({f_err, du_err, inv}) <= 1e-12, "<= 1e-12");
  return o;
}

// 12 ----------------------------------------------------------------------
Outcome h2_integral() {
  Outcome o;
  double worst = 0.0;
  std::string worst_name;
  for (const RecordedRun& r : recorded) {
    SolverConfig half = r.cfg;
    // Same sample times, so only the time step changes.
    half.dt *= 0.5;
    half.diag_stride *= 2;
    const RunResult rr = run(r.u0, r.forcing, half);
    if (!rr.ok()) {
      o.require(false, r.name + " blew up at dt/2");
      continue;
    }
    const double h = h2_squared_integral(rr.series);
    const double change = std::abs(h - r.h2_integral) / std::max(std::abs(r.h2_integral), 1e-300);
    o.require(std::isfinite(h) && std::isfinite(r.h2_integral), r.name + " finite");
    if (change > worst) {
      worst = change;
      worst_name = r.name;
    }
  }
  o.detail << recorded.size() << " runs, worst relative change under dt-halving " << 100.0 * worst << "% ("
           << worst_name << ")";
  o.require(!recorded.empty(), "runs recorded");
  o.require(worst <= 0.02, "<= 2%");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"operator algebra", operator_algebra},
      {"Parseval and transform round trip", parseval_roundtrip},
      {"exact single-mode decay and scheme order", single_mode_decay},
      {"energy identity", energy_identity},
      {"planar enstrophy cancellation", enstrophy_miracle},
      {"z-independent closure on [0,5]", planar_closure},
      {"thin-direction eps scaling", thin_scaling},
      {"planar L4 constant", planar_l4_constant},
      {"differential-inequality verdicts", inequality_verdicts},
      {"Gronwall containment", gronwall_containment},
      {"rescaling identities", rescaling},
      {"H2 integral under dt-halving", h2_integral},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria failed\n", failed, only.empty() ? criteria.size() : only.size());
  return failed == 0 ? 0 : 1;
}
