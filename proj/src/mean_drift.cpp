#include "thinns/mean_drift.hpp"

#include "thinns/operators.hpp"
#include "thinns/solver.hpp"

#include <cmath>
#include <numbers>

namespace thinns {

RawState raw_from_physical(const PhysicalField& u, const DomainSpec& domain) {
  if (u.components() != 3) throw std::invalid_argument("raw_from_physical: vector field required");
  RawState s;
  s.fluct = to_spectral(u, domain);
  for (int j = 0; j < 3; ++j) s.mean[j] = integrate(u, j) / u.domain.volume();
  return s;
}

SpectralField translate(const SpectralField& f, const Eigen::Vector3d& shift) {
  SpectralField out = f;
  const DomainSpec& d = f.domain();
  const std::size_t nm = d.mode_count();
  CoeffArray c = f.coeffs();
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const double arg = -2.0 * std::numbers::pi * d.wavevector(m, n, p).dot(shift);
    const Complex ph(std::cos(arg), std::sin(arg));
    for (int j = 0; j < f.components(); ++j) c[j * nm + idx] *= ph;
  });
  return SpectralField::from_coefficients(d, f.components(), std::move(c));
}

Eigen::Vector3d MeanDriftReduction::mean_velocity(double t) const {
  return u_mean0 + modulation.integral(t) * f_mean_profile;
}

Eigen::Vector3d MeanDriftReduction::drift(double t) const {
  return u_mean0 * t + modulation.double_integral(t) * f_mean_profile;
}

RawState MeanDriftReduction::reconstruct(const SpectralField& u, double t) const {
  return {translate(u, drift(t)), mean_velocity(t)};
}

MeanDriftReduction mean_drift_reduce(const RawState& u0, const RawForcing& f) {
  // In the moving frame the fluctuating forcing becomes f(x + drift(t)), which
  // a fixed profile cannot represent unless the frame is at rest.
  const bool moving = u0.mean.norm() > 0.0 || (f.profile_mean.norm() > 0.0 && f.modulation.sup() > 0.0);
  if (moving && f.profile.max_abs() > 0.0 && f.modulation.sup() > 0.0)
    throw std::invalid_argument("mean_drift_reduce: fluctuating forcing in a drifting frame is not supported");
  MeanDriftReduction r;
  r.u0 = u0.fluct;
  r.u0.pin_mean();
  r.forcing = ForcingSpec(f.profile, f.modulation);
  r.u_mean0 = u0.mean;
  r.f_mean_profile = f.profile_mean;
  r.modulation = f.modulation;
  return r;
}

RawState raw_rhs(const RawState& u, const RawForcing& f, double t) {
  const DomainSpec& d = u.fluct.domain();
  SpectralField adv = advect(u.fluct, u.fluct, dealiased_grid(d));
  for (int axis = 0; axis < 3; ++axis) adv += u.mean[axis] * partial(u.fluct, axis);
  SpectralField rhs = d.nu * laplacian(u.fluct) - leray(adv);
  const double a = f.modulation.value(t);
  rhs += leray(a * f.profile);
  return {rhs, a * f.profile_mean};
}

double raw_step_residual(const RawState& a, double ta, const RawState& b, double tb, const RawForcing& f) {
  const double h = tb - ta;
  const RawState ra = raw_rhs(a, f, ta), rb = raw_rhs(b, f, tb);
  const SpectralField defect = (1.0 / h) * (b.fluct - a.fluct) - 0.5 * (ra.fluct + rb.fluct);
  const Eigen::Vector3d mdefect = (b.mean - a.mean) / h - 0.5 * (ra.mean + rb.mean);
  const double vol = a.fluct.domain().volume();
  const double num = std::sqrt(std::pow(norm_l2(defect), 2) + vol * mdefect.squaredNorm());
  const double den = std::sqrt(std::pow(norm_l2(0.5 * (ra.fluct + rb.fluct)), 2) +
                               vol * (0.5 * (ra.mean + rb.mean)).squaredNorm());
  return den > 0.0 ? num / den : num;
}

}  // namespace thinns
