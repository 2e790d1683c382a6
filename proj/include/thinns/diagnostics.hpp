#pragma once

#include "thinns/spectral_field.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace thinns {

/// Which definition of the norm functionals is in force.
///   Thm2: phi = ||Dr||, psi = ||Ds||, phi~ = ||D^2 r||, psi~ = ||D^2 s||.
///   Thm1: the w = Qu part is folded in: phi = sqrt(||Dr||^2 + ||Dw||^2), ...
enum class Regime { Thm2, Thm1 };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

/// Component norms of one state; u = r + s + w with v = Pu, w = Qu, r = Rv, s = Sv.
struct DiagnosticSample {
  double t = 0.0;
  double theta = 0.0;  // ||u||_2
  double dr = 0.0, ds = 0.0, dw = 0.0;     // ||D r||, ||D s||, ||D w||
  double d2r = 0.0, d2s = 0.0, d2w = 0.0;  // ||D^2 r||, ...
  double h1 = 0.0, h2 = 0.0;
  double F = 0.0;  // ||f(t)||_2

  double du2() const { return dr * dr + ds * ds + dw * dw; }
  double phi(Regime g) const;
  double psi(Regime g) const;
  double phi_tilde(Regime g) const;
  double psi_tilde(Regime g) const;
  double chi() const { return d2w; }
};

DiagnosticSample compute_sample(const SpectralField& u, double t, double forcing_norm);

struct DiagnosticSeries {
  std::vector<DiagnosticSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  Eigen::ArrayXd times() const;
  template <class Fn>
  Eigen::ArrayXd column(Fn&& fn) const {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) out[static_cast<Eigen::Index>(i)] = fn(samples[i]);
    return out;
  }
  /// Copy with every norm multiplied by `factor` (times unchanged).
  DiagnosticSeries scaled(double factor) const;
};

/// Series from stored states; forcing norms are taken from `forcing_norms`
/// when given (one per state), else 0.
struct TimedState {
  double t;
  SpectralField u;
};
DiagnosticSeries compute_series(const std::vector<TimedState>& states,
                                const std::vector<double>& forcing_norms = {});

/// CSV with columns t,theta,phi,psi,phi_tilde,psi_tilde,chi,h1,h2,F
/// (Thm1 definitions, which reduce to the Thm2 ones when w = 0).
void write_series_csv(const std::filesystem::path& path, const DiagnosticSeries& s);
/// Raw split norms t,theta,dr,ds,dw,d2r,d2s,d2w,h1,h2,F; sufficient to rebuild
/// both definition families.
void write_split_csv(const std::filesystem::path& path, const DiagnosticSeries& s);
DiagnosticSeries read_split_csv(const std::filesystem::path& path);

/// Second-order finite-difference derivative on a (possibly nonuniform) grid:
/// centred in the interior, one-sided three-point stencils at the ends.
Eigen::ArrayXd time_derivative(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y);

/// Per sampled interval, |d(theta^2)/dt + 2 nu <||Du||^2>| / (nu <||Du||^2>)
/// with <.> the mean over the interval. Equal-length interval pairs are
/// merged and averaged by Simpson's rule; otherwise the trapezoid rule is
/// used. Only meaningful for unforced runs.
Eigen::ArrayXd energy_budget_residuals(const DiagnosticSeries& s, double nu);

// Enstrophy miracle ------------------------------------------------------

/// Normalised quadrature of the planar integral of Lap r . (r . grad r),
/// divided by ||D^2 r|| ||D r||^2 (planar norms). Requires r z-independent,
/// r_3 = 0, divergence-free; throws std::invalid_argument otherwise.
double check_enstrophy_miracle(const SpectralField& r);

/// Normalised planar integral of Lap s . (r . grad s) divided by
/// ||D^2 s|| ||D r|| ||D s||; nonzero in general.
double s_advection_residual(const SpectralField& r, const SpectralField& s);

// Differential inequalities ----------------------------------------------

struct InequalityReport {
  std::string name;
  std::string trajectory_id;
  std::vector<std::string> constant_names;
  std::vector<double> fitted_constants;
  std::vector<std::string> term_names;
  /// max over samples of |kappa_j * term_j|.
  std::vector<double> term_magnitudes;
  double residual_max = 0.0;
  double slack = 0.0;
  bool pass = false;
  Eigen::ArrayXd times;
  Eigen::ArrayXd residuals;

  nlohmann::json to_json() const;
};

struct InequalityOptions {
  /// Pass threshold: slack_rel * (largest term magnitude in the row).
  double slack_rel = 1e-6;
  std::string trajectory_id = "run";
};

/// Estimates the time derivatives of phi^2, psi^2, theta^2 and fits the
/// constants of the regime's system:
///   poincare-theta  theta^2 <= c1 (phi^2 + psi^2)
///   poincare-phi    phi <= c2 phi~          poincare-psi  psi <= c3 psi~
///   phi-growth      d phi^2 <= -phi~^2/c4 + c5 F^2
///   psi-growth      d psi^2 <= -psi~^2/c6 + c7 phi^2 psi^2 / eps + c8 F^2
///   theta-decay     d theta^2 <= -(phi^2 + psi^2)/c9 + c10 F^2
/// Thm1 adds (-1/c18 + c19 eps^(1/2) (phi + psi)) chi^2 to both growth rows;
/// there the admissible constants with the widest guard margin are kept.
/// Fitting on several series at once yields one constant set shared by all
/// of them. Throws std::invalid_argument for series shorter than 5 samples.
std::vector<InequalityReport> check_diff_inequalities(const std::vector<DiagnosticSeries>& series, double eps,
                                                      Regime regime, const InequalityOptions& opts = {});
std::vector<InequalityReport> check_diff_inequalities(const DiagnosticSeries& series, double eps, Regime regime,
                                                      const InequalityOptions& opts = {});

/// Looks up a report by name; throws std::out_of_range.
const InequalityReport& find_report(const std::vector<InequalityReport>& reports, const std::string& name);

void write_residual_trace_csv(const std::filesystem::path& path, const std::vector<InequalityReport>& reports);

// Theorem bounds ---------------------------------------------------------

struct BoundsInput {
  double U = 0.0, F = 0.0;
  double l1 = 1.0, l2 = 1.0, nu = 1.0, eps = 0.125;
  /// Fraction of the run window used for the limsup proxy.
  double tail_fraction = 0.25;
  bool blew_up = false;

  double M() const;
};

struct TheoremBoundsReport {
  double M = 0.0;
  double sup_h1 = 0.0;
  double tail_sup_h1 = 0.0;
  double h2_integral = 0.0;
  double rhs_h1 = 0.0;
  double rhs_limsup = 0.0;
  /// Smallest c making sup h1 <= c * rhs_h1 (resp. tail sup <= c * rhs_limsup).
  double c_required_h1 = 0.0;
  double c_required_limsup = 0.0;
  /// Largest c with M <= c^-1 nu l2^(1/2) / l1.
  double c_hypothesis = 0.0;
  bool vacuous = false;
  std::string message;

  nlohmann::json to_json() const;
};

TheoremBoundsReport evaluate_theorem_bounds(const DiagnosticSeries& series, const BoundsInput& in);

/// Trapezoid rule for the integral of h2^2 over the series window.
double h2_squared_integral(const DiagnosticSeries& series);

}  // namespace thinns
