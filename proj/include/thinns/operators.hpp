#pragma once

#include "thinns/spectral_field.hpp"
#include "thinns/transform.hpp"

namespace thinns {

// Fourier multipliers and the projection algebra. All operators are diagonal
// in the mode index, so they commute with each other and with truncate().

/// D^alpha: multiplies by (2 pi |k|)^alpha. The (-2 pi i)^alpha phase is
/// dropped; only moduli enter L2 norms.
SpectralField deriv(const SpectralField& f, double alpha);

/// d/dx_axis (axis 0, 1, 2): multiplier 2 pi i k_axis.
SpectralField partial(const SpectralField& f, int axis);

/// Laplacian: multiplier -(2 pi |k|)^2.
SpectralField laplacian(const SpectralField& f);

/// Leray projection: u -> u - k (k.u) / |k|^2 per mode.
SpectralField leray(const SpectralField& f);

/// Vertical average (p = 0 modes) and its complement.
SpectralField proj_P(const SpectralField& f);
SpectralField proj_Q(const SpectralField& f);

/// Horizontal components (u1, u2, 0) and vertical component (0, 0, u3).
SpectralField proj_R(const SpectralField& f);
SpectralField proj_S(const SpectralField& f);

/// Galerkin cutoff: zero every mode outside `box` (domain unchanged).
SpectralField truncate(const SpectralField& f, const ModeBox& box);

/// Copies `f` into the mode box of `target` (padding with zeros or
/// discarding modes). Geometry is taken from `target`.
SpectralField resample(const SpectralField& f, const DomainSpec& target);

/// Scalar field div u.
SpectralField divergence(const SpectralField& u);
/// Vector field grad g of a scalar field.
SpectralField gradient(const SpectralField& g);

/// max over nonzero modes of |k.u| / (|k| |u|); 0 for the zero field.
double max_relative_divergence(const SpectralField& u);
bool is_divergence_free(const SpectralField& u, double tol = 1e-12);

// Norms (Parseval). The L2 inner product is over the domain volume.

double inner(const SpectralField& a, const SpectralField& b);
double norm_l2(const SpectralField& f);
/// ||D^alpha f||_2.
double norm_Ds(const SpectralField& f, double alpha);
/// sqrt(||u||^2 + ||Du||^2).
double norm_h1(const SpectralField& f);
/// sqrt(||u||^2 + ||Du||^2 + ||D^2 u||^2).
double norm_h2(const SpectralField& f);

/// (2 pi min|k|)^(-alpha): the sharp Poincare constant of the mode box.
double poincare_constant(const DomainSpec& d, double alpha);

/// Pointwise product sum_i a_i b_i of two fields sampled on `grid` (scalar
/// result), or component product for scalars; used by quadrature checks.
PhysicalField pointwise_dot(const PhysicalField& a, const PhysicalField& b);

}  // namespace thinns
