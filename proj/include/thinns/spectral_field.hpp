#pragma once

#include "thinns/domain.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstddef>

namespace thinns {

using Complex = std::complex<double>;
using CoeffArray = Eigen::Array<Complex, Eigen::Dynamic, 1>;

/// Fourier coefficients of a real, mean-zero periodic field on the domain's
/// mode box. Vector fields carry 3 components, scalar fields 1.
///
/// Storage is component-major: coeffs[j * mode_count() + domain.index(m,n,p)].
/// Hermitian symmetry holds exactly; the zero mode is pinned to 0.
class SpectralField {
 public:
  SpectralField() = default;

  static SpectralField zeros(const DomainSpec& domain, int ncomp = 3);

  /// Adopts raw coefficients. Throws std::invalid_argument if they are not
  /// Hermitian to `tol` (relative to the largest coefficient); the residual
  /// asymmetry and any mean are then removed.
  static SpectralField from_coefficients(const DomainSpec& domain, int ncomp, CoeffArray coeffs,
                                         double tol = 1e-10);

  const DomainSpec& domain() const { return domain_; }
  int components() const { return ncomp_; }
  std::size_t mode_count() const { return domain_.mode_count(); }
  const CoeffArray& coeffs() const { return coeffs_; }

  Complex coeff(int j, int m, int n, int p) const {
    return coeffs_[offset(j) + domain_.index(m, n, p)];
  }
  Complex at(int j, std::size_t idx) const { return coeffs_[offset(j) + idx]; }

  /// Sets mode (m,n,p) of component j and its conjugate partner.
  void set_mode(int j, int m, int n, int p, Complex value);

  /// Segment view of one component.
  auto component(int j) { return coeffs_.segment(offset(j), mode_count()); }
  auto component(int j) const { return coeffs_.segment(offset(j), mode_count()); }

  /// Applies a real, even multiplier w(m,n,p) to every component.
  template <class Fn>
  SpectralField& scale_modes(Fn&& w) {
    const std::size_t nm = mode_count();
    for_each_mode(domain_, [&](int m, int n, int p, std::size_t idx) {
      const double s = w(m, n, p);
      for (int j = 0; j < ncomp_; ++j) coeffs_[j * nm + idx] *= s;
    });
    pin_mean();
    return *this;
  }

  /// Largest |c(k) - conj(c(-k))| relative to max |c|.
  double hermitian_defect() const;
  void symmetrize();
  void pin_mean();

  double max_abs() const;
  bool all_finite() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);

  /// Same coefficients, different geometry (mode boxes must match).
  SpectralField with_domain(const DomainSpec& d) const;

 private:
  SpectralField(const DomainSpec& d, int ncomp, CoeffArray c)
      : domain_(d), ncomp_(ncomp), coeffs_(std::move(c)) {}
  std::size_t offset(int j) const { return static_cast<std::size_t>(j) * mode_count(); }
  void require_compatible(const SpectralField& o) const;

  DomainSpec domain_{};
  int ncomp_ = 0;
  CoeffArray coeffs_{};
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);
SpectralField operator*(SpectralField a, double s);

/// Relative distance ||a - b||_2 / max(||b||_2, tiny) over coefficients.
double relative_difference(const SpectralField& a, const SpectralField& b);

}  // namespace thinns
