#include "thinns/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thinns {

SpectralField SpectralField::zeros(const DomainSpec& domain, int ncomp) {
  if (ncomp != 1 && ncomp != 3) throw std::invalid_argument("field: ncomp must be 1 or 3");
  return SpectralField(domain, ncomp, CoeffArray::Zero(static_cast<Eigen::Index>(ncomp * domain.mode_count())));
}

SpectralField SpectralField::from_coefficients(const DomainSpec& domain, int ncomp, CoeffArray coeffs,
                                               double tol) {
  if (ncomp != 1 && ncomp != 3) throw std::invalid_argument("field: ncomp must be 1 or 3");
  if (static_cast<std::size_t>(coeffs.size()) != ncomp * domain.mode_count())
    throw std::invalid_argument("field: coefficient count does not match mode box");
  SpectralField f(domain, ncomp, std::move(coeffs));
  if (!f.all_finite()) throw std::invalid_argument("field: non-finite coefficient");
  const double defect = f.hermitian_defect();
  if (defect > tol)
    throw std::invalid_argument("field: coefficients are not Hermitian (defect " +
                                std::to_string(defect) + ")");
  f.symmetrize();
  return f;
}

void SpectralField::set_mode(int j, int m, int n, int p, Complex value) {
  const std::size_t idx = domain_.index(m, n, p);
  if (idx == domain_.zero_index()) return;
  coeffs_[offset(j) + idx] = value;
  coeffs_[offset(j) + domain_.mirror(idx)] = std::conj(value);
}

double SpectralField::hermitian_defect() const {
  const std::size_t nm = mode_count();
  double worst = 0.0;
  for (int j = 0; j < ncomp_; ++j)
    for (std::size_t i = 0; i < nm; ++i)
      worst = std::max(worst, std::abs(coeffs_[offset(j) + i] - std::conj(coeffs_[offset(j) + domain_.mirror(i)])));
  const double scale = max_abs();
  return scale > 0.0 ? worst / scale : 0.0;
}

void SpectralField::symmetrize() {
  const std::size_t nm = mode_count();
  for (int j = 0; j < ncomp_; ++j) {
    for (std::size_t i = 0; i < nm / 2; ++i) {
      Complex& a = coeffs_[offset(j) + i];
      Complex& b = coeffs_[offset(j) + domain_.mirror(i)];
      const Complex avg = 0.5 * (a + std::conj(b));
      a = avg;
      b = std::conj(avg);
    }
  }
  pin_mean();
}

void SpectralField::pin_mean() {
  const std::size_t z = domain_.zero_index();
  for (int j = 0; j < ncomp_; ++j) coeffs_[offset(j) + z] = 0.0;
}

double SpectralField::max_abs() const { return coeffs_.size() ? coeffs_.abs().maxCoeff() : 0.0; }

bool SpectralField::all_finite() const {
  for (Eigen::Index i = 0; i < coeffs_.size(); ++i)
    if (!std::isfinite(coeffs_[i].real()) || !std::isfinite(coeffs_[i].imag())) return false;
  return true;
}

void SpectralField::require_compatible(const SpectralField& o) const {
  if (ncomp_ != o.ncomp_ || domain_.box() != o.domain_.box())
    throw std::invalid_argument("field: incompatible operands");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_compatible(o);
  coeffs_ += o.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_compatible(o);
  coeffs_ -= o.coeffs_;
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

SpectralField SpectralField::with_domain(const DomainSpec& d) const {
  if (d.box() != domain_.box()) throw std::invalid_argument("field: mode box mismatch");
  return SpectralField(d, ncomp_, coeffs_);
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }
SpectralField operator*(SpectralField a, double s) { return a *= s; }

double relative_difference(const SpectralField& a, const SpectralField& b) {
  const double diff = (a.coeffs() - b.coeffs()).matrix().norm();
  const double ref = b.coeffs().matrix().norm();
  return ref > 0.0 ? diff / ref : diff;
}

}  // namespace thinns
