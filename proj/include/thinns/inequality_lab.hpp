#pragma once

#include "thinns/spectral_field.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace thinns {

/// Functional inequalities whose best constant is estimated from below.
/// All trial fields are scalar.
///   Lemma4Inf:  ||w||_inf / ||D^2 w||_2,  w with p != 0 modes only
///   Lemma4L4:   ||w||_4   / ||D w||_2,    w with p != 0 modes only
///   Lemma6:     ||f||_4   / ||D^(1/2) f||_2 on the plane (n3 = 0 domains,
///               planar norms)
///   Poincare:   ||f||_2   / ||D^alpha f||_2
///   HausdorffYoung: ||f||_p / (V^(1/p) (sum |f^|^p')^(1/p'))
enum class LabInequality { Lemma4Inf, Lemma4L4, Lemma6, Poincare, HausdorffYoung };

LabInequality lab_inequality_from_string(const std::string& s);
std::string to_string(LabInequality k);

struct LabOptions {
  /// Total ratio evaluations (random trials plus refinement).
  int budget = 400;
  /// Share of the budget spent on coordinate ascent.
  double refine_fraction = 0.25;
  /// Coefficients refined by coordinate ascent.
  int refine_coefficients = 24;
  std::uint64_t seed = 1;
  double alpha = 1.0;  // Poincare
  double hy_p = 4.0;   // HausdorffYoung
  /// Sup norms are sampled on a grid this many times finer than 2n+1 per
  /// axis, reduced until the grid has at most max_grid_points samples.
  double oversample = 4.0;
  std::size_t max_grid_points = std::size_t{1} << 23;
  /// Worker threads for the random trials.
  int threads = 1;
};

struct EnsembleBest {
  std::string ensemble;
  int trials = 0;
  double best_ratio = 0.0;
};

struct ConstantEstimate {
  LabInequality inequality = LabInequality::Poincare;
  DomainSpec domain;
  int evaluations = 0;
  int trials = 0;
  /// Best ratio found; a certified lower bound (achieved by `maximizer`).
  double max_ratio = 0.0;
  /// max_ratio / eps^power with power 1/2 (Lemma4Inf), 1/4 (Lemma4L4), else 0.
  double normalized_ratio = 0.0;
  double ratio_before_refinement = 0.0;
  SpectralField maximizer;
  std::vector<EnsembleBest> ensembles;

  nlohmann::json to_json() const;
};

/// Ratio of one trial field (scalar) for the given inequality; the field is
/// projected onto the admissible subspace first (p != 0 modes for Lemma4*).
double lab_ratio(LabInequality k, const SpectralField& f, const LabOptions& opts = {});

/// Random ensembles plus coordinate-ascent refinement of the best trial.
/// Throws std::invalid_argument for budget < 1, a domain without admissible
/// modes, or Lemma6 on a domain with n3 != 0.
ConstantEstimate estimate_constant(LabInequality k, const DomainSpec& domain, const LabOptions& opts = {});

/// Predicted eps exponent (1/2, 1/4) or 0 when the inequality has none.
double eps_power(LabInequality k);

/// Exact best constant of the sup-norm inequality on a mode box:
/// sqrt(sum_{p != 0} |k|^-4) / ((2 pi)^2 sqrt(l1 l2 eps)), attained by the
/// field with coefficients |k|^-4.
double sup_inequality_sharp_constant(const DomainSpec& d);

// Scaling fits ---------------------------------------------------------------

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Standard error of the slope.
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  int points = 0;

  nlohmann::json to_json() const;
};

/// Least-squares slope of log(ratio) against log(eps). Throws
/// std::invalid_argument for fewer than 3 points or nonpositive values.
ScalingFit fit_eps_scaling(const std::vector<double>& eps, const std::vector<double>& ratios);

/// Domain for an eps sweep: square l x l plane with in-plane cutoff
/// ceil(modes_per_eps * l / eps) and n3 thin modes.
DomainSpec sweep_domain(double l, double eps, double modes_per_eps, int n3);

// Dyadic blocks ----------------------------------------------------------------

/// Block norms of a planar scalar field. With |r| = sqrt(m^2/l1^2 + n^2/l2^2),
/// A[j]^2 = sum over 2^j <= |r| < 2^(j+1) of |f^_r|^2 (both members of each
/// conjugate pair counted); modes with 0 < |r| < 1 form `below_unit`.
struct DyadicProfile {
  std::vector<double> A;
  double below_unit = 0.0;
  /// sum_j A_j^2 + below_unit^2 and sum over all nonzero modes of |f^|^2.
  double block_energy = 0.0, mode_energy = 0.0;
  /// sum_j 2^j A_j^2.
  double weighted_sum = 0.0;
  /// ||D^(1/2) f||_2^2 with planar normalisation.
  double d_half_sq = 0.0;
  /// c = 1/(2 pi l1 l2), for which weighted_sum <= c d_half_sq.
  double multiplier_constant = 0.0;

  bool bound_holds() const { return weighted_sum <= multiplier_constant * d_half_sq * (1.0 + 1e-12); }
};

/// Throws std::invalid_argument for non-planar (p != 0 content) or vector fields.
DyadicProfile dyadic_decompose(const SpectralField& f);

}  // namespace thinns
