#pragma once

#include "thinns/forcing.hpp"
#include "thinns/spectral_field.hpp"
#include "thinns/transform.hpp"

#include <Eigen/Core>

namespace thinns {

/// A velocity field that may carry a spatial mean: fluctuation + mean.
struct RawState {
  SpectralField fluct;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
};

/// Forcing f(t) = value(t) * (profile + profile_mean) with a possibly
/// nonzero spatial mean.
struct RawForcing {
  SpectralField profile;
  Eigen::Vector3d profile_mean = Eigen::Vector3d::Zero();
  Modulation modulation;
};

/// Splits sampled values into mean and mean-free Fourier part.
RawState raw_from_physical(const PhysicalField& u, const DomainSpec& domain);

/// f(x - shift): coefficient (m,n,p) multiplied by exp(-2 pi i k.shift).
SpectralField translate(const SpectralField& f, const Eigen::Vector3d& shift);

/// Mean-free problem equivalent to one with nonzero means. The spatial mean
/// of the raw velocity obeys d/dt mean = mean of f, so the reduced solution
/// is viewed in a frame moving with it:
///   u_raw(x, t) = u(x - drift(t), t) + mean_velocity(t),
///   drift(t) = integral_0^t mean_velocity(s) ds.
struct MeanDriftReduction {
  SpectralField u0;
  ForcingSpec forcing;
  Eigen::Vector3d u_mean0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d f_mean_profile = Eigen::Vector3d::Zero();
  Modulation modulation;

  Eigen::Vector3d mean_velocity(double t) const;
  Eigen::Vector3d drift(double t) const;
  /// The raw-problem state corresponding to reduced state u at time t.
  RawState reconstruct(const SpectralField& u, double t) const;
};

/// Throws std::invalid_argument when the frame drifts and the forcing has a
/// fluctuating part: the reduced forcing would then be a travelling profile.
MeanDriftReduction mean_drift_reduce(const RawState& u0, const RawForcing& f);

/// Time derivative prescribed by the raw equation:
/// fluct' = nu Lap u - L((u + mean) . grad u) + L(f), mean' = mean of f.
RawState raw_rhs(const RawState& u, const RawForcing& f, double t);

/// Relative defect of the trapezoid-rule step from a to b (taken at times
/// ta, tb) against raw_rhs; O(dt^2) for a true solution.
double raw_step_residual(const RawState& a, double ta, const RawState& b, double tb, const RawForcing& f);

}  // namespace thinns
