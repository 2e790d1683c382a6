#pragma once

#include <Eigen/Core>

#include <optional>

namespace thinns {

/// Solves  min c^T x  s.t.  A x <= b, x >= 0  for c >= 0 through its dual
/// (whose origin is feasible), with a dense tableau simplex and Bland's rule.
/// Returns nullopt when the primal is infeasible.
std::optional<Eigen::VectorXd> solve_lp_min(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                                            const Eigen::VectorXd& b);

/// Fit of  lhs_i <= sum_j sign_j kappa_j terms(i, j),  kappa >= 0.
///
/// Residuals are r_i = lhs_i - sum_j sign_j kappa_j terms(i, j). The fit first
/// minimises max_i r_i; if that is within `slack`, it then picks, among the
/// constants with every r_i <= slack_i, the ones minimising max_i |r_i|
/// (the tightest admissible inequality).
struct InequalityFit {
  Eigen::VectorXd kappa;
  Eigen::VectorXd residuals;
  double max_residual = 0.0;
  bool admissible = false;
};

/// Optional tie-break for rows with a guarded coefficient
/// (-kappa[threshold] + kappa[coupling] g(t)), g(t) <= g_max, whose term is
/// dominated by every other negative-sign term. Starting from the tightest
/// fit, up to half of each other dissipative constant may move onto the
/// threshold; among those admissible constants the margin
/// kappa[threshold] - g_max kappa[coupling] is maximised.
struct GuardPreference {
  Eigen::Index threshold = -1, coupling = -1;
  double g_max = 0.0;
};

InequalityFit fit_inequality(const Eigen::VectorXd& lhs, const Eigen::MatrixXd& terms,
                             const Eigen::VectorXd& signs, const Eigen::VectorXd& slack,
                             const GuardPreference& guard = {});

}  // namespace thinns
