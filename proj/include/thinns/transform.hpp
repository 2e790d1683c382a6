#pragma once

#include "thinns/spectral_field.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>

namespace thinns {

/// Uniform sample counts per axis.
struct GridShape {
  int N1 = 1;
  int N2 = 1;
  int N3 = 1;

  std::size_t points() const { return static_cast<std::size_t>(N1) * N2 * N3; }
  bool operator==(const GridShape&) const = default;
};

/// Smallest 2^a 3^b 5^c integer >= n.
int good_fft_size(int n);

/// Grid with at least `factor` samples per retained mode count (2n+1) on each
/// axis, rounded up to a good FFT size. Axes with no modes get one sample.
GridShape scaled_grid(const DomainSpec& d, double factor);
/// 2n+1 per axis: lossless for the field itself, aliases products.
GridShape minimal_grid(const DomainSpec& d);
/// 3/2 rule: products of two fields (and integrals of cubic ones) are exact.
GridShape dealiased_grid(const DomainSpec& d);
/// N >= q*n + 1 per axis: integrals of q-fold products are exact.
GridShape product_exact_grid(const DomainSpec& d, int q);

/// Real samples of a field at x = (i1 l1/N1, i2 l2/N2, i3 eps/N3).
/// Sample (i1,i2,i3) is row (i1*N2 + i2)*N3 + i3; one column per component.
struct PhysicalField {
  DomainSpec domain;
  GridShape grid;
  Eigen::ArrayXXd values;

  int components() const { return static_cast<int>(values.cols()); }
  double cell_volume() const { return domain.volume() / static_cast<double>(grid.points()); }
  Eigen::Vector3d position(std::size_t row) const;
};

/// Evaluates the Fourier series on the grid. Throws std::invalid_argument when
/// the grid cannot hold the spectrum (N_i < 2 n_i + 1).
PhysicalField to_physical(const SpectralField& f, const GridShape& grid);

/// Discrete Fourier coefficients of the samples restricted to the domain's
/// mode box; the mean is dropped.
SpectralField to_spectral(const PhysicalField& u, const DomainSpec& domain);

/// Trapezoid (= exact for band-limited integrands) quadrature of column j.
double integrate(const PhysicalField& u, int j = 0);
/// (integral of |u|^p)^(1/p) with |u| the Euclidean norm over components.
double quadrature_lp_norm(const PhysicalField& u, double p);
/// max over samples of |u|.
double sample_sup_norm(const PhysicalField& u);

}  // namespace thinns
