#include "thinns/gronwall.hpp"

#include "thinns/operators.hpp"
#include "thinns/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <stdexcept>

namespace thinns {

namespace {

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }
bool nonneg_finite(double x) { return x >= 0.0 && std::isfinite(x); }

}  // namespace

void InequalitySystem::validate() const {
  for (int i : {1, 2, 3, 4, 6, 9})
    if (!positive_finite(c[i])) throw std::invalid_argument("system: c" + std::to_string(i) + " must be positive");
  for (int i : {5, 7, 8, 10})
    if (!nonneg_finite(c[i])) throw std::invalid_argument("system: c" + std::to_string(i) + " must be nonnegative");
  if (regime == Regime::Thm1) {
    if (!(c[18] > 0.0)) throw std::invalid_argument("system: c18 must be positive");
    if (!nonneg_finite(c[19])) throw std::invalid_argument("system: c19 must be nonnegative");
  }
  if (!(U >= 0.0) || !(F >= 0.0)) throw std::invalid_argument("system: U and F must be nonnegative");
  if (!(eps > 0.0)) throw std::invalid_argument("system: eps must be positive");
}

nlohmann::json InequalitySystem::to_json() const {
  nlohmann::json j;
  j["regime"] = to_string(regime);
  j["U"] = U;
  j["F"] = F;
  j["eps"] = eps;
  j["M"] = M();
  nlohmann::json cs = nlohmann::json::object();
  for (int i = 1; i <= 10; ++i) cs["c" + std::to_string(i)] = c[i];
  if (regime == Regime::Thm1) {
    cs["c18"] = std::isfinite(c[18]) ? nlohmann::json(c[18]) : nlohmann::json(nullptr);
    cs["c19"] = c[19];
  }
  j["constants"] = cs;
  return j;
}

InequalitySystem system_from_reports(const std::vector<InequalityReport>& reports, double U, double F, double eps,
                                     Regime regime) {
  InequalitySystem s;
  s.U = U;
  s.F = F;
  s.eps = eps;
  s.regime = regime;
  auto kappa = [&](const std::string& name, const std::string& constant) {
    const InequalityReport& r = find_report(reports, name);
    for (std::size_t i = 0; i < r.constant_names.size(); ++i)
      if (r.constant_names[i] == constant) return r.fitted_constants[i];
    throw std::out_of_range("report " + name + " has no constant " + constant);
  };
  auto inv = [](double k) { return k > 0.0 ? 1.0 / k : std::numeric_limits<double>::infinity(); };
  s.c[1] = kappa("poincare-theta", "c1");
  s.c[2] = kappa("poincare-phi", "c2");
  s.c[3] = kappa("poincare-psi", "c3");
  s.c[4] = inv(kappa("phi-growth", "1/c4"));
  s.c[5] = kappa("phi-growth", "c5");
  s.c[6] = inv(kappa("psi-growth", "1/c6"));
  s.c[7] = kappa("psi-growth", "c7");
  s.c[8] = kappa("psi-growth", "c8");
  s.c[9] = inv(kappa("theta-decay", "1/c9"));
  s.c[10] = kappa("theta-decay", "c10");
  if (regime == Regime::Thm1) {
    s.c[18] = inv(std::min(kappa("phi-growth", "1/c18"), kappa("psi-growth", "1/c18")));
    s.c[19] = std::max(kappa("phi-growth", "c19"), kappa("psi-growth", "c19"));
  }
  return s;
}

DerivedConstants derive_constants(const InequalitySystem& sys) {
  const auto& c = sys.c;
  DerivedConstants d;
  d.c14 = c[4] * c[2] * c[2];
  d.c13 = std::max(1.0, c[5] * d.c14);
  d.c12 = c[9] * c[1];
  d.c11 = std::max(2.0 * c[1], c[10] * d.c12);
  d.b = 1.0 / (c[6] * c[3] * c[3]);
  d.K = c[7] * c[9] * d.c13;
  d.c15 = std::sqrt(2.0 * std::max(1.0 + c[8] / d.b, d.K * (c[10] / d.b + d.c11)));
  d.c16 = std::max({d.c12, d.c14, 1.0 / d.b});
  d.c17 = std::sqrt(2.0 * std::max(d.K * (c[10] / d.b + d.c11), c[8] / d.b));
  return d;
}

Eigen::VectorXd rk4_integrate(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
                              Eigen::VectorXd y, double t0, double t1, int n) {
  if (n < 1) throw std::invalid_argument("rk4_integrate: n must be >= 1");
  const double h = (t1 - t0) / n;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * h;
    const Eigen::VectorXd k1 = rhs(t, y);
    const Eigen::VectorXd k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(t + h, y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

GronwallEnvelope solve_envelope(const InequalitySystem& sys, const Eigen::ArrayXd& times) {
  sys.validate();
  if (times.size() == 0) throw std::invalid_argument("solve_envelope: no sample times");
  for (Eigen::Index i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("solve_envelope: times must increase");
  const auto& c = sys.c;
  const DerivedConstants d = derive_constants(sys);
  const double U2 = sys.U * sys.U, F2 = sys.F * sys.F, M = sys.M(), M2 = M * M;
  const double a = 1.0 / d.c14, rtheta = 1.0 / d.c12;

  GronwallEnvelope env;
  env.times = times;
  env.derived = d;
  const Eigen::Index n = times.size();
  env.theta2.resize(n);
  env.phi2.resize(n);
  env.psi2.resize(n);
  env.theta2_closed.resize(n);
  env.phi2_closed.resize(n);
  env.psi2_closed.resize(n);

  const double phi_inf = c[5] * d.c14 * F2;
  auto rhs = [&](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd dy(3);
    dy[0] = -a * y[0] + c[5] * F2;
    dy[1] = (-d.b + c[7] * y[0] / sys.eps) * y[1] + c[8] * F2;
    dy[2] = -rtheta * y[2] + c[10] * F2;
    return dy;
  };
  Eigen::VectorXd y(3);
  y << U2, U2, 2.0 * c[1] * U2;
  const double t0 = times[0];
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) {
      const double span = times[i] - times[i - 1];
      const double rate = std::max({a, rtheta, d.b + c[7] * std::max(y[0], phi_inf) / sys.eps, 1e-300});
      const int steps = std::max(1, static_cast<int>(std::ceil(span * rate / 0.01)));
      y = rk4_integrate(rhs, y, times[i - 1] - t0, times[i] - t0, steps);
    }
    env.phi2[i] = y[0];
    env.psi2[i] = y[1];
    env.theta2[i] = y[2];

    const double t = times[i] - t0;
    env.theta2_closed[i] = d.c11 * (F2 + (U2 - F2) * std::exp(-t / d.c12));
    env.phi2_closed[i] = d.c13 * (F2 + (U2 - F2) * std::exp(-t / d.c14));
    const double eb = std::exp(-d.b * t);
    env.psi2_closed[i] = eb * U2 + (1.0 - eb) * (d.K * c[10] * M2 * F2 / sys.eps + c[8] * F2) / d.b +
                         d.K * d.c11 * M2 * M2 / sys.eps;
  }
  env.psi_bound = d.c15 * std::max(M2 / std::sqrt(sys.eps), M);
  env.psi_limsup_bound = d.c17 * std::max(F2 / std::sqrt(sys.eps), sys.F);
  env.integral_c9 = c[9];
  env.integral_theta0 = 2.0 * c[1] * U2;
  env.integral_rate = c[10] * F2;
  return env;
}

GronwallEnvelope solve_envelope(const InequalitySystem& sys, double horizon, int samples) {
  if (!(horizon > 0.0) || samples < 2) throw std::invalid_argument("solve_envelope: bad horizon or sample count");
  return solve_envelope(sys, Eigen::ArrayXd::LinSpaced(samples, 0.0, horizon));
}

void GronwallEnvelope::write_csv(const std::filesystem::path& path) const {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.string().c_str(), "w"), &std::fclose);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  std::fprintf(f.get(), "t,theta2,phi2,psi2,theta2_closed,phi2_closed,psi2_closed\n");
  for (Eigen::Index i = 0; i < times.size(); ++i)
    std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", times[i], theta2[i], phi2[i], psi2[i],
                 theta2_closed[i], phi2_closed[i], psi2_closed[i]);
}

std::string ContainmentReport::guard_verdict() const {
  if (!guard_applicable) return "not applicable";
  if (!guard_first_crossing) return "never";
  char buf[64];
  std::snprintf(buf, sizeof buf, "crossed at t=%.6g", *guard_first_crossing);
  return buf;
}

nlohmann::json ContainmentReport::to_json() const {
  nlohmann::json j;
  j["contained"] = contained;
  j["first_violation_time"] = first_violation_time ? nlohmann::json(*first_violation_time) : nlohmann::json(nullptr);
  j["first_violation_quantity"] = first_violation_quantity;
  j["worst_ratio"] = {{"theta2", worst_ratio_theta}, {"phi2", worst_ratio_phi}, {"psi2", worst_ratio_psi}};
  j["closed_form_contained"] = closed_form_contained;
  j["guard"] = {{"verdict", guard_verdict()}, {"threshold", guard_threshold}, {"max", guard_max}};
  return j;
}

ContainmentReport check_trajectory(const DiagnosticSeries& series, const InequalitySystem& sys, double rel_slack) {
  if (series.empty()) throw std::invalid_argument("check_trajectory: empty series");
  for (const auto& s : series.samples)
    if (s.F > sys.F * (1.0 + 1e-9) + 1e-300)
      throw std::invalid_argument("check_trajectory: series forcing exceeds the system's F");
  const Regime g = sys.regime;
  const GronwallEnvelope env = solve_envelope(sys, series.times());
  ContainmentReport rep;
  auto ratio = [](double q, double e) {
    if (q == 0.0) return 0.0;
    return e > 0.0 ? q / e : std::numeric_limits<double>::infinity();
  };
  auto violate = [&](double t, const std::string& what) {
    if (rep.contained) {
      rep.contained = false;
      rep.first_violation_time = t;
      rep.first_violation_quantity = what;
    }
  };
  const double lim = 1.0 + rel_slack;
  const auto& s0 = series.samples.front();
  if (s0.phi(g) > sys.U * lim) violate(s0.t, "phi(0) > U");
  if (s0.psi(g) > sys.U * lim) violate(s0.t, "psi(0) > U");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series.samples[i];
    const Eigen::Index ii = static_cast<Eigen::Index>(i);
    const double th2 = s.theta * s.theta, ph2 = std::pow(s.phi(g), 2), ps2 = std::pow(s.psi(g), 2);
    const double rt = ratio(th2, env.theta2[ii]), rp = ratio(ph2, env.phi2[ii]), rs = ratio(ps2, env.psi2[ii]);
    rep.worst_ratio_theta = std::max(rep.worst_ratio_theta, rt);
    rep.worst_ratio_phi = std::max(rep.worst_ratio_phi, rp);
    rep.worst_ratio_psi = std::max(rep.worst_ratio_psi, rs);
    if (rt > lim) violate(s.t, "theta^2");
    if (rp > lim) violate(s.t, "phi^2");
    if (rs > lim) violate(s.t, "psi^2");
    if (ratio(th2, env.theta2_closed[ii]) > lim || ratio(ph2, env.phi2_closed[ii]) > lim ||
        ratio(ps2, env.psi2_closed[ii]) > lim)
      rep.closed_form_contained = false;
  }
  if (g == Regime::Thm1) {
    rep.guard_applicable = true;
    rep.guard_threshold = 1.0 / sys.c[18];
    rep.guard.resize(static_cast<Eigen::Index>(series.size()));
    const double eh = std::sqrt(sys.eps);
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto& s = series.samples[i];
      const double gv = sys.c[19] * eh * (s.phi(g) + s.psi(g));
      rep.guard[static_cast<Eigen::Index>(i)] = gv;
      rep.guard_max = std::max(rep.guard_max, gv);
      if (!rep.guard_first_crossing && !(gv < rep.guard_threshold)) rep.guard_first_crossing = s.t;
    }
  }
  return rep;
}

// Rescaling ---------------------------------------------------------------

namespace {

int copies(const DomainSpec& d) {
  if (d.l2 > d.l1) throw std::invalid_argument("rescale: l2 > l1");
  return std::max(1, static_cast<int>(std::floor(d.l1 / d.l2 + 1e-12)));
}

DomainSpec unit_domain(const DomainSpec& d, int n) {
  DomainSpec r;
  r.l1 = 1.0;
  r.l2 = n * d.l2 / d.l1;
  r.eps = d.eps / d.l1;
  r.nu = 1.0;
  r.n1 = d.n1;
  r.n2 = n * d.n2;
  r.n3 = d.n3;
  return r;
}

SpectralField spread(const SpectralField& f, const DomainSpec& to, int n, double scale) {
  const DomainSpec& from = f.domain();
  CoeffArray c = CoeffArray::Zero(static_cast<Eigen::Index>(to.mode_count()) * f.components());
  const std::size_t nm = to.mode_count(), fm = from.mode_count();
  for_each_mode(from, [&](int m, int k, int p, std::size_t idx) {
    const std::size_t dst = to.index(m, n * k, p);
    for (int j = 0; j < f.components(); ++j) c[j * nm + dst] = scale * f.coeffs()[j * fm + idx];
  });
  return SpectralField::from_coefficients(to, f.components(), std::move(c));
}

SpectralField gather(const SpectralField& f, const DomainSpec& to, int n, double scale) {
  const DomainSpec& from = f.domain();
  const double tol = 1e-13 * std::max(f.max_abs(), 1e-300);
  for_each_mode(from, [&](int, int k, int, std::size_t idx) {
    if (k % n == 0) return;
    for (int j = 0; j < f.components(); ++j)
      if (std::abs(f.at(j, idx)) > tol)
        throw std::invalid_argument("inverse_rescale: field has modes outside the image of the original box");
  });
  CoeffArray c = CoeffArray::Zero(static_cast<Eigen::Index>(to.mode_count()) * f.components());
  const std::size_t nm = to.mode_count();
  for_each_mode(to, [&](int m, int k, int p, std::size_t idx) {
    for (int j = 0; j < f.components(); ++j) c[j * nm + idx] = scale * f.coeff(j, m, n * k, p);
  });
  return SpectralField::from_coefficients(to, f.components(), std::move(c));
}

// ||Du||_2 by quadrature of the sampled gradient.
double quadrature_du(const SpectralField& u) {
  const GridShape g = minimal_grid(u.domain());
  double acc = 0.0;
  for (int axis = 0; axis < 3; ++axis) acc += std::pow(quadrature_lp_norm(to_physical(partial(u, axis), g), 2.0), 2);
  return std::sqrt(acc);
}

double quadrature_l2(const SpectralField& u) {
  return quadrature_lp_norm(to_physical(u, minimal_grid(u.domain())), 2.0);
}

}  // namespace

Rescaled rescale(const SpectralField& u, const SpectralField& f) {
  if (!(u.domain() == f.domain())) throw std::invalid_argument("rescale: u and f on different domains");
  const DomainSpec& d = u.domain();
  Rescaled r;
  r.n = copies(d);
  r.domain = unit_domain(d, r.n);
  r.u = spread(u, r.domain, r.n, d.l1 / d.nu);
  r.f = spread(f, r.domain, r.n, d.l1 * d.l1 * d.l1 / (d.nu * d.nu));
  r.time_factor = d.nu / (d.l1 * d.l1);
  return r;
}

std::pair<SpectralField, SpectralField> inverse_rescale(const SpectralField& u, const SpectralField& f,
                                                        const DomainSpec& original) {
  const int n = copies(original);
  const DomainSpec expect = unit_domain(original, n);
  if (!(u.domain().box() == expect.box()) || !(f.domain().box() == expect.box()))
    throw std::invalid_argument("inverse_rescale: fields do not live on the rescaled box");
  const double l1 = original.l1, nu = original.nu;
  return {gather(u, original, n, nu / l1), gather(f, original, n, nu * nu / (l1 * l1 * l1))};
}

nlohmann::json RescaleIdentityCheck::to_json() const {
  return {{"f_norm", f_norm},     {"f_predicted", f_predicted},   {"f_rel_err", f_rel_err},
          {"du_norm", du_norm},   {"du_predicted", du_predicted}, {"du_rel_err", du_rel_err},
          {"h1_norm", h1_norm},   {"h1_predicted", h1_predicted}, {"h1_ratio", h1_ratio},
          {"inverse_err", inverse_err}};
}

RescaleIdentityCheck check_rescale_identities(const SpectralField& u, const SpectralField& f) {
  const DomainSpec& d = u.domain();
  const Rescaled r = rescale(u, f);
  const double sn = std::sqrt(static_cast<double>(r.n));
  RescaleIdentityCheck c;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };
  c.f_norm = quadrature_l2(f);
  c.f_predicted = d.nu * d.nu / (sn * std::pow(d.l1, 1.5)) * quadrature_l2(r.f);
  c.f_rel_err = c.f_norm == 0.0 && c.f_predicted == 0.0 ? 0.0 : rel(c.f_norm, c.f_predicted);
  const double factor = d.nu / (sn * std::sqrt(d.l1));
  c.du_norm = quadrature_du(u);
  c.du_predicted = factor * quadrature_du(r.u);
  c.du_rel_err = c.du_norm == 0.0 && c.du_predicted == 0.0 ? 0.0 : rel(c.du_norm, c.du_predicted);
  c.h1_norm = std::hypot(quadrature_l2(u), c.du_norm);
  c.h1_predicted = factor * std::hypot(quadrature_l2(r.u), quadrature_du(r.u));
  c.h1_ratio = c.h1_predicted > 0.0 ? c.h1_norm / c.h1_predicted : 1.0;
  const auto [ub, fb] = inverse_rescale(r.u, r.f, d);
  c.inverse_err = std::max(relative_difference(ub, u), f.max_abs() > 0.0 ? relative_difference(fb, f) : fb.max_abs());
  return c;
}

// Thresholds ----------------------------------------------------------------

std::vector<ThresholdRow> literature_thresholds(const ThresholdInput& in) {
  const double e = in.eps;
  if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("thresholds: eps must lie in (0, 1)");
  const double lg = std::log(1.0 / e);
  const auto& dl = in.power_log_delta;
  const double alpha = in.alpha ? in.alpha(e) : 1.0 / lg;
  const std::string alpha_note = in.alpha ? "alpha(eps)" : "alpha(eps)=1/log(1/eps) [illustrative default]";
  const double ci = 1.0 / in.c;
  std::vector<ThresholdRow> rows;
  auto add = [&](std::string src, std::string q, std::string formula, double v) {
    rows.push_back({std::move(src), std::move(q), std::move(formula), v});
  };
  add("power-log", "||Pu(0)||_H1", "eps^(7/24+d1) log(1/eps)^d2", std::pow(e, 7.0 / 24 + dl[1]) * std::pow(lg, dl[2]));
  add("power-log", "||Qu(0)||_H1", "eps^(-5/48+d3) log(1/eps)^d4", std::pow(e, -5.0 / 48 + dl[3]) * std::pow(lg, dl[4]));
  add("power-log", "sup||Pf||_2", "eps^(7/24+d5) log(1/eps)^d6", std::pow(e, 7.0 / 24 + dl[5]) * std::pow(lg, dl[6]));
  add("power-log", "sup||Qf||_2", "eps^(-1/2+d7) log(1/eps)^d8", std::pow(e, -0.5 + dl[7]) * std::pow(lg, dl[8]));
  const double da = in.alpha_power_delta;
  add("alpha-power", "||Pu(0)||_H1", alpha_note + " eps^(1/6+d)", alpha * std::pow(e, 1.0 / 6 + da));
  add("alpha-power", "||Qu(0)||_H1", alpha_note + " eps^(-1/6+d)", alpha * std::pow(e, -1.0 / 6 + da));
  add("alpha-power", "sup||Pf||_2", alpha_note + " eps^(1/6+d)", alpha * std::pow(e, 1.0 / 6 + da));
  add("alpha-power", "sup||Qf||_2", alpha_note + " eps^(-1/6+d)", alpha * std::pow(e, -1.0 / 6 + da));
  add("exp-anisotropic", "||Pu||_H1", "c^-1 eps^(1/2) sqrt(log(1/eps))", ci * std::sqrt(e) * std::sqrt(lg));
  add("exp-anisotropic", "||Qu||_H1", "c^-1 eps^(-1/2+d)", ci * std::pow(e, -0.5 + in.exp_delta));
  add("uniform", "M=max(U,F)", "c^-1", ci);
  return rows;
}

void write_thresholds_csv(const std::filesystem::path& path, const std::vector<ThresholdRow>& rows, double eps,
                          bool header) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.string().c_str(), header ? "w" : "a"),
                                                    &std::fclose);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  if (header) std::fprintf(f.get(), "eps,source,quantity,formula,value\n");
  for (const auto& r : rows)
    std::fprintf(f.get(), "%.17g,%s,%s,\"%s\",%.17g\n", eps, r.source.c_str(), r.quantity.c_str(), r.formula.c_str(),
                 r.value);
}

double anisotropic_smallness_functional(const SpectralField& u, double c) {
  const SpectralField w = proj_Q(u);
  const double h_half = std::hypot(norm_l2(w), norm_Ds(w, 0.5));
  const double pu = norm_l2(proj_P(u));
  return h_half * std::exp(c * pu * pu / u.domain().eps);
}

}  // namespace thinns
