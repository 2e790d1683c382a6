#pragma once

#include "thinns/spectral_field.hpp"

#include <string>

namespace thinns {

/// Scalar time modulation of a forcing profile.
struct Modulation {
  enum class Kind { Off, Constant, Sinusoidal };
  Kind kind = Kind::Constant;
  double amplitude = 1.0;
  double omega = 0.0;  // sinusoidal: amplitude * cos(omega t + phase)
  double phase = 0.0;

  double value(double t) const;
  /// sup_t |value(t)|.
  double sup() const;
  /// Closed-form integral of value over [0, t].
  double integral(double t) const;
  /// Closed-form integral over [0, t] of integral(s).
  double double_integral(double t) const;
};

Modulation::Kind modulation_kind_from_string(const std::string& s);
std::string to_string(Modulation::Kind k);

/// f(t) = L(value(t) * profile). The profile is Leray-projected and mean-zero
/// at construction; evaluate() projects again after the modulation.
class ForcingSpec {
 public:
  ForcingSpec() = default;
  ForcingSpec(SpectralField profile, Modulation modulation);

  /// Zero forcing on `domain`.
  static ForcingSpec none(const DomainSpec& domain);

  SpectralField evaluate(double t) const;
  double norm_at(double t) const;
  /// F = sup_t ||f(t)||_2.
  double bound() const { return bound_; }
  const SpectralField& profile() const { return profile_; }
  const Modulation& modulation() const { return modulation_; }
  bool is_zero() const { return bound_ == 0.0; }

 private:
  SpectralField profile_;
  Modulation modulation_;
  double profile_norm_ = 0.0;
  double bound_ = 0.0;
};

}  // namespace thinns
