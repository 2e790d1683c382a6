#include "thinns/diagnostics.hpp"

#include "thinns/chebyshev_fit.hpp"
#include "thinns/operators.hpp"
#include "thinns/solver.hpp"
#include "thinns/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace thinns {

std::string to_string(Regime r) { return r == Regime::Thm2 ? "thm2" : "thm1"; }

Regime regime_from_string(const std::string& s) {
  if (s == "thm2") return Regime::Thm2;
  if (s == "thm1") return Regime::Thm1;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

double DiagnosticSample::phi(Regime g) const { return g == Regime::Thm2 ? dr : std::hypot(dr, dw); }
double DiagnosticSample::psi(Regime g) const { return g == Regime::Thm2 ? ds : std::hypot(ds, dw); }
double DiagnosticSample::phi_tilde(Regime g) const { return g == Regime::Thm2 ? d2r : std::hypot(d2r, d2w); }
double DiagnosticSample::psi_tilde(Regime g) const { return g == Regime::Thm2 ? d2s : std::hypot(d2s, d2w); }

DiagnosticSample compute_sample(const SpectralField& u, double t, double forcing_norm) {
  const SpectralField v = proj_P(u);
  const SpectralField w = proj_Q(u);
  const SpectralField r = proj_R(v);
  const SpectralField s = proj_S(v);
  DiagnosticSample d;
  d.t = t;
  d.theta = norm_l2(u);
  d.dr = norm_Ds(r, 1.0);
  d.ds = norm_Ds(s, 1.0);
  d.dw = norm_Ds(w, 1.0);
  d.d2r = norm_Ds(r, 2.0);
  d.d2s = norm_Ds(s, 2.0);
  d.d2w = norm_Ds(w, 2.0);
  const double du2 = d.du2();
  const double d2u2 = d.d2r * d.d2r + d.d2s * d.d2s + d.d2w * d.d2w;
  d.h1 = std::sqrt(d.theta * d.theta + du2);
  d.h2 = std::sqrt(d.theta * d.theta + du2 + d2u2);
  d.F = forcing_norm;
  return d;
}

Eigen::ArrayXd DiagnosticSeries::times() const {
  return column([](const DiagnosticSample& s) { return s.t; });
}

DiagnosticSeries DiagnosticSeries::scaled(double factor) const {
  DiagnosticSeries out = *this;
  for (auto& s : out.samples) {
    s.theta *= factor;
    s.dr *= factor;
    s.ds *= factor;
    s.dw *= factor;
    s.d2r *= factor;
    s.d2s *= factor;
    s.d2w *= factor;
    s.h1 *= factor;
    s.h2 *= factor;
  }
  return out;
}

DiagnosticSeries compute_series(const std::vector<TimedState>& states, const std::vector<double>& forcing_norms) {
  if (!forcing_norms.empty() && forcing_norms.size() != states.size())
    throw std::invalid_argument("compute_series: one forcing norm per state expected");
  DiagnosticSeries s;
  for (std::size_t i = 0; i < states.size(); ++i)
    s.samples.push_back(compute_sample(states[i].u, states[i].t, forcing_norms.empty() ? 0.0 : forcing_norms[i]));
  return s;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_write(const std::filesystem::path& path) {
  File f(std::fopen(path.string().c_str(), "w"));
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

void write_series_csv(const std::filesystem::path& path, const DiagnosticSeries& s) {
  File f = open_for_write(path);
  std::fprintf(f.get(), "t,theta,phi,psi,phi_tilde,psi_tilde,chi,h1,h2,F\n");
  const Regime g = Regime::Thm1;
  for (const auto& d : s.samples)
    std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.t, d.theta, d.phi(g),
                 d.psi(g), d.phi_tilde(g), d.psi_tilde(g), d.chi(), d.h1, d.h2, d.F);
  if (std::ferror(f.get())) throw std::runtime_error("write failed: " + path.string());
}

void write_split_csv(const std::filesystem::path& path, const DiagnosticSeries& s) {
  File f = open_for_write(path);
  std::fprintf(f.get(), "t,theta,dr,ds,dw,d2r,d2s,d2w,h1,h2,F\n");
  for (const auto& d : s.samples)
    std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.t, d.theta, d.dr,
                 d.ds, d.dw, d.d2r, d.d2s, d.d2w, d.h1, d.h2, d.F);
  if (std::ferror(f.get())) throw std::runtime_error("write failed: " + path.string());
}

DiagnosticSeries read_split_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t,theta,dr,ds,dw,d2r,d2s,d2w,h1,h2,F") throw std::runtime_error("unexpected header in " + path.string());
  DiagnosticSeries s;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    double v[11];
    int k = 0;
    while (std::getline(ls, cell, ',') && k < 11) {
      char* end = nullptr;
      v[k] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) break;
      ++k;
    }
    if (k != 11) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 11 numbers");
    s.samples.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]});
  }
  return s;
}

Eigen::ArrayXd time_derivative(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y) {
  const Eigen::Index n = t.size();
  if (y.size() != n) throw std::invalid_argument("time_derivative: size mismatch");
  if (n < 3) throw std::invalid_argument("time_derivative: at least 3 samples required");
  Eigen::ArrayXd d(n);
  // Derivative at x0 of the quadratic through (x0,y0), (x1,y1), (x2,y2).
  auto stencil = [](double x0, double x1, double x2, double y0, double y1, double y2) {
    const double h1 = x1 - x0, h2 = x2 - x0;
    return -(h1 + h2) / (h1 * h2) * y0 + h2 / (h1 * (h2 - h1)) * y1 - h1 / (h2 * (h2 - h1)) * y2;
  };
  d[0] = stencil(t[0], t[1], t[2], y[0], y[1], y[2]);
  d[n - 1] = stencil(t[n - 1], t[n - 2], t[n - 3], y[n - 1], y[n - 2], y[n - 3]);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
    d[i] = (-hp / (hm * (hm + hp))) * y[i - 1] + ((hp - hm) / (hm * hp)) * y[i] + (hm / (hp * (hm + hp))) * y[i + 1];
  }
  return d;
}

Eigen::ArrayXd energy_budget_residuals(const DiagnosticSeries& s, double nu) {
  const std::size_t n = s.size();
  if (n < 2) return {};
  // Pairs of intervals with equal length use Simpson's rule on the midpoint
  // sample; a leftover interval falls back to the trapezoid rule.
  std::vector<double> out;
  std::size_t i = 0;
  while (i + 1 < n) {
    const auto& a = s.samples[i];
    double dtheta2, mean;
    std::size_t next;
    const bool simpson = i + 2 < n && std::abs((s.samples[i + 2].t - s.samples[i + 1].t) - (s.samples[i + 1].t - a.t)) <=
                                           1e-9 * (s.samples[i + 1].t - a.t);
    if (simpson) {
      const auto& m = s.samples[i + 1];
      const auto& b = s.samples[i + 2];
      dtheta2 = (b.theta * b.theta - a.theta * a.theta) / (b.t - a.t);
      mean = (a.du2() + 4.0 * m.du2() + b.du2()) / 6.0;
      next = i + 2;
    } else {
      const auto& b = s.samples[i + 1];
      dtheta2 = (b.theta * b.theta - a.theta * a.theta) / (b.t - a.t);
      mean = 0.5 * (a.du2() + b.du2());
      next = i + 1;
    }
    const double scale = nu * mean;
    out.push_back(scale > 0.0 ? std::abs(dtheta2 + 2.0 * nu * mean) / scale : std::abs(dtheta2));
    i = next;
  }
  return Eigen::Map<Eigen::ArrayXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

namespace {

void require_planar_r(const SpectralField& r) {
  if (r.components() != 3) throw std::invalid_argument("planar flow must be a vector field");
  if (norm_l2(proj_Q(r)) > 1e-14 * std::max(norm_l2(r), 1e-300))
    throw std::invalid_argument("planar flow must be z-independent");
  if (norm_l2(proj_S(r)) > 1e-14 * std::max(norm_l2(r), 1e-300))
    throw std::invalid_argument("planar flow must have zero third component");
  if (max_relative_divergence(r) > 1e-10) throw std::invalid_argument("planar flow must be divergence-free");
}

// Integral over the domain of Lap a . (b . grad a) on a grid that integrates
// cubic products exactly.
double cubic_integral(const SpectralField& a, const SpectralField& b) {
  const GridShape g = dealiased_grid(a.domain());
  const PhysicalField lap = to_physical(laplacian(a), g);
  const PhysicalField adv = to_physical(advect(b, a, g), g);
  return integrate(pointwise_dot(lap, adv), 0);
}

}  // namespace

double check_enstrophy_miracle(const SpectralField& r) {
  require_planar_r(r);
  const double den = norm_Ds(r, 2.0) * std::pow(norm_Ds(r, 1.0), 2);
  if (den == 0.0) return 0.0;
  // Volume integrals and norms of z-independent fields carry factors eps and
  // eps^(1/2); rescale to the planar normalisation.
  return cubic_integral(r, r) / den * std::sqrt(r.domain().eps);
}

double s_advection_residual(const SpectralField& r, const SpectralField& s) {
  require_planar_r(r);
  const double den = norm_Ds(s, 2.0) * norm_Ds(r, 1.0) * norm_Ds(s, 1.0);
  if (den == 0.0) return 0.0;
  return cubic_integral(s, r) / den * std::sqrt(r.domain().eps);
}

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["trajectory_id"] = trajectory_id;
  j["constants"] = nlohmann::json::object();
  for (std::size_t i = 0; i < constant_names.size(); ++i) j["constants"][constant_names[i]] = fitted_constants[i];
  j["terms"] = nlohmann::json::object();
  for (std::size_t i = 0; i < term_names.size(); ++i) j["terms"][term_names[i]] = term_magnitudes[i];
  j["residual_max"] = residual_max;
  j["slack"] = slack;
  j["verdict"] = pass ? "pass" : "fail";
  return j;
}

namespace {

// Pooled rows of all series for one inequality.
struct Rows {
  std::vector<double> t, lhs;
  std::vector<std::vector<double>> terms;
};

InequalityReport fit_rows(const std::string& name, const std::string& id, const Rows& rows,
                          const std::vector<std::string>& constant_names, const std::vector<std::string>& term_names,
                          const std::vector<double>& signs, double slack_rel, const GuardPreference& guard = {}) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.lhs.size());
  const Eigen::Index k = static_cast<Eigen::Index>(signs.size());
  Eigen::VectorXd lhs(n), sg(k);
  Eigen::MatrixXd T(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    lhs[i] = rows.lhs[i];
    for (Eigen::Index j = 0; j < k; ++j) T(i, j) = rows.terms[i][j];
  }
  for (Eigen::Index j = 0; j < k; ++j) sg[j] = signs[j];
  const double scale = lhs.size() ? lhs.cwiseAbs().maxCoeff() : 0.0;
  const double slack = slack_rel * scale;
  const InequalityFit fit = fit_inequality(lhs, T, sg, Eigen::VectorXd::Constant(n, slack), guard);

  InequalityReport rep;
  rep.name = name;
  rep.trajectory_id = id;
  rep.constant_names = constant_names;
  rep.term_names = term_names;
  rep.fitted_constants.assign(fit.kappa.data(), fit.kappa.data() + fit.kappa.size());
  for (Eigen::Index j = 0; j < k; ++j)
    rep.term_magnitudes.push_back(n ? (fit.kappa[j] * T.col(j)).cwiseAbs().maxCoeff() : 0.0);
  rep.residual_max = fit.max_residual;
  rep.slack = slack;
  // fit.admissible already allows for roundoff at the slack boundary.
  rep.pass = fit.admissible;
  rep.times = Eigen::Map<const Eigen::ArrayXd>(rows.t.data(), n);
  rep.residuals = fit.residuals.array();
  return rep;
}

// Smallest c with num <= c * den on every sample; 0/0 counts as 0.
InequalityReport ratio_report(const std::string& name, const std::string& id, const std::string& cname,
                              const std::vector<double>& t, const std::vector<double>& num,
                              const std::vector<double>& den) {
  double c = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (num[i] == 0.0) continue;
    if (den[i] == 0.0) {
      finite = false;
      continue;
    }
    c = std::max(c, num[i] / den[i]);
  }
  InequalityReport rep;
  rep.name = name;
  rep.trajectory_id = id;
  rep.constant_names = {cname};
  rep.fitted_constants = {finite ? c : std::numeric_limits<double>::infinity()};
  rep.term_names = {"ratio"};
  rep.term_magnitudes = {c};
  const Eigen::Index n = static_cast<Eigen::Index>(num.size());
  rep.times = Eigen::Map<const Eigen::ArrayXd>(t.data(), n);
  rep.residuals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) rep.residuals[i] = num[i] - c * den[i];
  rep.residual_max = n ? rep.residuals.maxCoeff() : 0.0;
  rep.slack = 0.0;
  rep.pass = finite;
  return rep;
}

}  // namespace

std::vector<InequalityReport> check_diff_inequalities(const std::vector<DiagnosticSeries>& series, double eps,
                                                      Regime g, const InequalityOptions& opts) {
  if (series.empty()) throw std::invalid_argument("check_diff_inequalities: no series");
  for (const auto& s : series)
    if (s.size() < 5) throw std::invalid_argument("check_diff_inequalities: series shorter than 5 samples");
  if (!(eps > 0.0)) throw std::invalid_argument("check_diff_inequalities: eps must be positive");

  const bool full = g == Regime::Thm1;
  Rows phi_rows, psi_rows, theta_rows;
  std::vector<double> tt, theta2, sum2, phi, phit, psi, psit;
  const double eh = std::sqrt(eps);
  double g_max = 0.0;  // largest eps^1/2 (phi + psi)
  for (const auto& s : series) {
    const Eigen::ArrayXd t = s.times();
    const Eigen::ArrayXd dphi2 = time_derivative(t, s.column([&](const auto& d) { return std::pow(d.phi(g), 2); }));
    const Eigen::ArrayXd dpsi2 = time_derivative(t, s.column([&](const auto& d) { return std::pow(d.psi(g), 2); }));
    const Eigen::ArrayXd dth2 = time_derivative(t, s.column([](const auto& d) { return d.theta * d.theta; }));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& d = s.samples[i];
      const Eigen::Index ii = static_cast<Eigen::Index>(i);
      const double p = d.phi(g), q = d.psi(g), pt = d.phi_tilde(g), qt = d.psi_tilde(g);
      const double F2 = d.F * d.F, chi2 = d.chi() * d.chi();
      const double coupling = eh * (p + q) * chi2;
      g_max = std::max(g_max, eh * (p + q));
      tt.push_back(d.t);
      theta2.push_back(d.theta * d.theta);
      sum2.push_back(p * p + q * q);
      phi.push_back(p);
      phit.push_back(pt);
      psi.push_back(q);
      psit.push_back(qt);

      phi_rows.t.push_back(d.t);
      phi_rows.lhs.push_back(dphi2[ii]);
      psi_rows.t.push_back(d.t);
      psi_rows.lhs.push_back(dpsi2[ii]);
      theta_rows.t.push_back(d.t);
      theta_rows.lhs.push_back(dth2[ii]);
      if (full) {
        phi_rows.terms.push_back({pt * pt, chi2, coupling, F2});
        psi_rows.terms.push_back({qt * qt, chi2, p * p * q * q / eps, coupling, F2});
      } else {
        phi_rows.terms.push_back({pt * pt, F2});
        psi_rows.terms.push_back({qt * qt, p * p * q * q / eps, F2});
      }
      theta_rows.terms.push_back({p * p + q * q, F2});
    }
  }

  const std::string& id = opts.trajectory_id;
  std::vector<InequalityReport> out;
  out.push_back(ratio_report("poincare-theta", id, "c1", tt, theta2, sum2));
  out.push_back(ratio_report("poincare-phi", id, "c2", tt, phi, phit));
  out.push_back(ratio_report("poincare-psi", id, "c3", tt, psi, psit));
  if (full) {
    out.push_back(fit_rows("phi-growth", id, phi_rows, {"1/c4", "1/c18", "c19", "c5"},
                           {"phi_tilde^2", "chi^2", "eps^1/2 (phi+psi) chi^2", "F^2"}, {-1, -1, 1, 1}, opts.slack_rel,
                           GuardPreference{1, 2, g_max}));
    out.push_back(fit_rows("psi-growth", id, psi_rows, {"1/c6", "1/c18", "c7", "c19", "c8"},
                           {"psi_tilde^2", "chi^2", "eps^-1 phi^2 psi^2", "eps^1/2 (phi+psi) chi^2", "F^2"},
                           {-1, -1, 1, 1, 1}, opts.slack_rel, GuardPreference{1, 3, g_max}));
  } else {
    out.push_back(fit_rows("phi-growth", id, phi_rows, {"1/c4", "c5"}, {"phi_tilde^2", "F^2"}, {-1, 1}, opts.slack_rel));
    out.push_back(fit_rows("psi-growth", id, psi_rows, {"1/c6", "c7", "c8"}, {"psi_tilde^2", "eps^-1 phi^2 psi^2", "F^2"},
                           {-1, 1, 1}, opts.slack_rel));
  }
  out.push_back(fit_rows("theta-decay", id, theta_rows, {"1/c9", "c10"}, {"phi^2+psi^2", "F^2"}, {-1, 1}, opts.slack_rel));
  return out;
}

std::vector<InequalityReport> check_diff_inequalities(const DiagnosticSeries& series, double eps, Regime regime,
                                                      const InequalityOptions& opts) {
  return check_diff_inequalities(std::vector<DiagnosticSeries>{series}, eps, regime, opts);
}

const InequalityReport& find_report(const std::vector<InequalityReport>& reports, const std::string& name) {
  for (const auto& r : reports)
    if (r.name == name) return r;
  throw std::out_of_range("no inequality report named '" + name + "'");
}

void write_residual_trace_csv(const std::filesystem::path& path, const std::vector<InequalityReport>& reports) {
  File f = open_for_write(path);
  std::fprintf(f.get(), "name,trajectory_id,t,residual\n");
  for (const auto& r : reports)
    for (Eigen::Index i = 0; i < r.residuals.size(); ++i)
      std::fprintf(f.get(), "%s,%s,%.17g,%.17g\n", r.name.c_str(), r.trajectory_id.c_str(), r.times[i],
                   r.residuals[i]);
  if (std::ferror(f.get())) throw std::runtime_error("write failed: " + path.string());
}

double BoundsInput::M() const { return std::max(U, l1 / nu * F); }

nlohmann::json TheoremBoundsReport::to_json() const {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return nullptr;
  };
  return {{"M", M},
          {"sup_h1", num(sup_h1)},
          {"tail_sup_h1", num(tail_sup_h1)},
          {"h2_squared_integral", num(h2_integral)},
          {"rhs_h1", rhs_h1},
          {"rhs_limsup", rhs_limsup},
          {"c_required_h1", num(c_required_h1)},
          {"c_required_limsup", num(c_required_limsup)},
          {"c_hypothesis", num(c_hypothesis)},
          {"vacuous", vacuous},
          {"message", message}};
}

double h2_squared_integral(const DiagnosticSeries& series) {
  double acc = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const auto& a = series.samples[i - 1];
    const auto& b = series.samples[i];
    acc += 0.5 * (b.t - a.t) * (a.h2 * a.h2 + b.h2 * b.h2);
  }
  return acc;
}

TheoremBoundsReport evaluate_theorem_bounds(const DiagnosticSeries& series, const BoundsInput& in) {
  TheoremBoundsReport r;
  r.M = in.M();
  const double geo = std::pow(in.l1, 1.5) / (in.nu * std::sqrt(in.l2)) / std::sqrt(in.eps);
  r.rhs_h1 = std::max(r.M, geo * r.M * r.M);
  const double mf = in.l1 / in.nu * in.F;
  r.rhs_limsup = std::max(mf, std::pow(in.l1, 3.5) / (std::pow(in.nu, 3) * std::sqrt(in.l2)) / std::sqrt(in.eps) *
                                  in.F * in.F);
  r.c_hypothesis = r.M > 0.0 ? in.nu * std::sqrt(in.l2) / in.l1 / r.M : std::numeric_limits<double>::infinity();
  if (in.blew_up) {
    r.vacuous = true;
    r.message = "bound vacuous: hypothesis M <= c^-1 nu l2^(1/2) / l1 presumably violated";
    r.sup_h1 = r.tail_sup_h1 = r.h2_integral = std::numeric_limits<double>::infinity();
    r.c_required_h1 = r.c_required_limsup = std::numeric_limits<double>::infinity();
    return r;
  }
  if (series.empty()) throw std::invalid_argument("evaluate_theorem_bounds: empty series");
  const double t0 = series.samples.front().t, t1 = series.samples.back().t;
  const double tail_start = t1 - in.tail_fraction * (t1 - t0);
  for (const auto& s : series.samples) {
    r.sup_h1 = std::max(r.sup_h1, s.h1);
    if (s.t >= tail_start) r.tail_sup_h1 = std::max(r.tail_sup_h1, s.h1);
  }
  r.h2_integral = h2_squared_integral(series);
  auto required = [](double lhs, double rhs) {
    if (lhs == 0.0) return 0.0;
    return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  };
  r.c_required_h1 = required(r.sup_h1, r.rhs_h1);
  r.c_required_limsup = required(r.tail_sup_h1, r.rhs_limsup);
  r.message = "ok";
  return r;
}

}  // namespace thinns
