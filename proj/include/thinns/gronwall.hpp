#pragma once

#include "thinns/diagnostics.hpp"
#include "thinns/spectral_field.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace thinns {

// Comparison systems ------------------------------------------------------

/// Constants of the differential-inequality system
///   theta^2 <= c1 (phi^2 + psi^2),  phi <= c2 phi~,  psi <= c3 psi~,
///   d phi^2   <= -phi~^2/c4 + c5 F^2                       [+ G chi^2]
///   d psi^2   <= -psi~^2/c6 + c7 phi^2 psi^2 / eps + c8 F^2 [+ G chi^2]
///   d theta^2 <= -(phi^2 + psi^2)/c9 + c10 F^2
/// with G = -1/c18 + c19 eps^(1/2) (phi + psi) in the Thm1 regime.
struct InequalitySystem {
  /// c[i] for i = 1..20; c[0] unused.
  std::array<double, 21> c{};
  double U = 0.0, F = 0.0, eps = 0.125;
  Regime regime = Regime::Thm2;

  double M() const { return std::max(U, F); }
  /// Throws std::invalid_argument for nonpositive or non-finite constants
  /// (the F^2 coefficients c5, c8, c10 and the coupling c7, c19 may be 0).
  void validate() const;
  nlohmann::json to_json() const;
};

/// Builds a system from fitted reports. 1/c18 is the smaller and c19 the
/// larger of the values fitted in the two growth rows.
InequalitySystem system_from_reports(const std::vector<InequalityReport>& reports, double U, double F, double eps,
                                     Regime regime);

/// Constants derived from c1..c10 and the closed-form bounds they give.
struct DerivedConstants {
  double c11 = 0, c12 = 0, c13 = 0, c14 = 0, c15 = 0, c16 = 0, c17 = 0;
  /// psi^2 decay rate 1/(c6 c3^2) and coupling factor c7 c9 c13.
  double b = 0, K = 0;
};
DerivedConstants derive_constants(const InequalitySystem& sys);

struct GronwallEnvelope {
  Eigen::ArrayXd times;
  /// Comparison-ODE solutions dominating theta^2, phi^2, psi^2.
  Eigen::ArrayXd theta2, phi2, psi2;
  /// Closed-form bounds for the same quantities.
  Eigen::ArrayXd theta2_closed, phi2_closed, psi2_closed;
  DerivedConstants derived;
  /// psi <= c15 max(eps^-1/2 M^2, M) and limsup psi <= c17 max(eps^-1/2 F^2, F).
  double psi_bound = 0.0, psi_limsup_bound = 0.0;

  /// Integrating the theta row: the integral of phi^2 + psi^2 over [0, t]
  /// is at most c9 (theta(0)^2 + c10 F^2 t) with theta(0)^2 <= 2 c1 U^2.
  double integral_bound(double t) const { return integral_c9 * (integral_theta0 + integral_rate * t); }
  void write_csv(const std::filesystem::path& path) const;

  double integral_c9 = 0.0, integral_theta0 = 0.0, integral_rate = 0.0;
};

/// Envelope sampled at `times` (increasing, starting at or after 0). The
/// comparison ODE is integrated with classical RK4 on substeps no longer
/// than 0.01 over the fastest rate. Throws std::invalid_argument for an
/// invalid system.
GronwallEnvelope solve_envelope(const InequalitySystem& sys, const Eigen::ArrayXd& times);
/// Uniform sampling of [0, horizon].
GronwallEnvelope solve_envelope(const InequalitySystem& sys, double horizon, int samples = 201);

/// Integrates y' = rhs(t, y) with classical RK4 on n equal steps.
Eigen::VectorXd rk4_integrate(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
                              Eigen::VectorXd y, double t0, double t1, int n);

struct ContainmentReport {
  bool contained = true;
  std::optional<double> first_violation_time;
  std::string first_violation_quantity;
  /// max over samples of quantity / envelope.
  double worst_ratio_theta = 0.0, worst_ratio_phi = 0.0, worst_ratio_psi = 0.0;
  bool closed_form_contained = true;
  /// Guard trace g(t) = c19 eps^(1/2) (phi + psi) against 1/c18 (Thm1 only).
  bool guard_applicable = false;
  Eigen::ArrayXd guard;
  double guard_threshold = 0.0;
  double guard_max = 0.0;
  std::optional<double> guard_first_crossing;

  std::string guard_verdict() const;
  nlohmann::json to_json() const;
};

/// Compares a series against the system's envelope. `rel_slack` is the
/// relative tolerance allowed above the envelope; initial values above U
/// count as violations at the first sample. Throws std::invalid_argument when
/// the series' forcing exceeds the system's F or the series is empty.
ContainmentReport check_trajectory(const DiagnosticSeries& series, const InequalitySystem& sys,
                                   double rel_slack = 1e-6);

// Rescaling to unit size ---------------------------------------------------

/// Map of a problem on [0,l1]x[0,l2]x[0,eps] with viscosity nu to the unit
/// problem on [0,1]x[0,n l2/l1]x[0,eps/l1] with viscosity 1, n = floor(l1/l2):
///   u~(x, t) = (l1/nu) u(l1 x1, l1 x2 mod l2, l1 x3, l1^2 t / nu),
///   f~(x, t) = (l1^3/nu^2) f(...).
/// Spectrally, mode (m, k, p) moves to (m, n k, p).
struct Rescaled {
  SpectralField u, f;
  DomainSpec domain;
  int n = 1;
  /// t~ = time_factor * t.
  double time_factor = 1.0;
};

/// Throws std::invalid_argument if l2 > l1 or the fields live on different domains.
Rescaled rescale(const SpectralField& u, const SpectralField& f);
/// Inverse of rescale onto `original`. Throws std::invalid_argument when a
/// mode that cannot come from the original box is nonzero.
std::pair<SpectralField, SpectralField> inverse_rescale(const SpectralField& u, const SpectralField& f,
                                                        const DomainSpec& original);

struct RescaleIdentityCheck {
  /// ||f||_2 against nu^2 / (n^1/2 l1^3/2) ||f~||_2, both by quadrature.
  double f_norm = 0, f_predicted = 0, f_rel_err = 0;
  /// ||Du||_2 against nu / (n^1/2 l1^1/2) ||Du~||_2.
  double du_norm = 0, du_predicted = 0, du_rel_err = 0;
  /// Full H^1 norms; the L2 part scales differently, so this ratio is 1
  /// only when l1 = 1.
  double h1_norm = 0, h1_predicted = 0, h1_ratio = 0;
  double inverse_err = 0;
  nlohmann::json to_json() const;
};
RescaleIdentityCheck check_rescale_identities(const SpectralField& u, const SpectralField& f);

// Literature thresholds ----------------------------------------------------

struct ThresholdInput {
  double eps = 0.1;
  /// delta_1..delta_8 of the power-log conditions (index 0 unused).
  std::array<double, 9> power_log_delta{};
  /// delta of the alpha(eps)-power conditions.
  double alpha_power_delta = 0.0;
  /// delta of the exponential-anisotropic sufficient conditions.
  double exp_delta = 0.0;
  /// Generic constant c (and c_delta) in the sufficient conditions.
  double c = 1.0;
  /// alpha(eps) with alpha -> 0; defaults to 1/log(1/eps).
  std::function<double(double)> alpha;
};

struct ThresholdRow {
  std::string source;
  std::string quantity;
  std::string formula;
  double value = 0.0;
};

/// Throws std::invalid_argument unless 0 < eps < 1.
std::vector<ThresholdRow> literature_thresholds(const ThresholdInput& in);
void write_thresholds_csv(const std::filesystem::path& path, const std::vector<ThresholdRow>& rows, double eps,
                          bool header);

/// ||Qu||_{H^1/2} exp(c ||Pu||_2^2 / eps).
double anisotropic_smallness_functional(const SpectralField& u, double c);

}  // namespace thinns
