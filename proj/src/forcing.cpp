#include "thinns/forcing.hpp"

#include "thinns/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace thinns {

double Modulation::value(double t) const {
  switch (kind) {
    case Kind::Off: return 0.0;
    case Kind::Constant: return amplitude;
    case Kind::Sinusoidal: return amplitude * std::cos(omega * t + phase);
  }
  return 0.0;
}

double Modulation::sup() const { return kind == Kind::Off ? 0.0 : std::abs(amplitude); }

double Modulation::integral(double t) const {
  switch (kind) {
    case Kind::Off: return 0.0;
    case Kind::Constant: return amplitude * t;
    case Kind::Sinusoidal:
      if (omega == 0.0) return amplitude * std::cos(phase) * t;
      return amplitude * (std::sin(omega * t + phase) - std::sin(phase)) / omega;
  }
  return 0.0;
}

double Modulation::double_integral(double t) const {
  switch (kind) {
    case Kind::Off: return 0.0;
    case Kind::Constant: return 0.5 * amplitude * t * t;
    case Kind::Sinusoidal:
      if (omega == 0.0) return 0.5 * amplitude * std::cos(phase) * t * t;
      return amplitude * ((std::cos(phase) - std::cos(omega * t + phase)) / (omega * omega) -
                          t * std::sin(phase) / omega);
  }
  return 0.0;
}

Modulation::Kind modulation_kind_from_string(const std::string& s) {
  if (s == "off" || s == "none") return Modulation::Kind::Off;
  if (s == "constant") return Modulation::Kind::Constant;
  if (s == "sinusoidal") return Modulation::Kind::Sinusoidal;
  throw std::invalid_argument("unknown modulation '" + s + "'");
}

std::string to_string(Modulation::Kind k) {
  switch (k) {
    case Modulation::Kind::Off: return "off";
    case Modulation::Kind::Constant: return "constant";
    case Modulation::Kind::Sinusoidal: return "sinusoidal";
  }
  return "?";
}

ForcingSpec::ForcingSpec(SpectralField profile, Modulation modulation)
    : profile_(leray(profile)), modulation_(modulation) {
  profile_.pin_mean();
  profile_norm_ = norm_l2(profile_);
  bound_ = modulation_.sup() * profile_norm_;
}

ForcingSpec ForcingSpec::none(const DomainSpec& domain) {
  return ForcingSpec(SpectralField::zeros(domain, 3), Modulation{Modulation::Kind::Off});
}

SpectralField ForcingSpec::evaluate(double t) const { return leray(modulation_.value(t) * profile_); }

double ForcingSpec::norm_at(double t) const { return std::abs(modulation_.value(t)) * profile_norm_; }

}  // namespace thinns
