#pragma once

#include "thinns/spectral_field.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace testutil {

using thinns::Complex;
using thinns::DomainSpec;
using thinns::SpectralField;

// Gaussian coefficients on every mode; Hermitian by construction of set_mode.
inline SpectralField random_field(const DomainSpec& d, int ncomp, std::mt19937_64& rng, bool planar = false) {
  SpectralField f = SpectralField::zeros(d, ncomp);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t half = d.mode_count() / 2;
  thinns::for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    if (idx >= half || (planar && p != 0)) return;
    for (int j = 0; j < ncomp; ++j) f.set_mode(j, m, n, p, Complex(g(rng), g(rng)));
  });
  return f;
}

// Direct summation of the Fourier series at x: independent of the FFT path.
inline double eval_at(const SpectralField& f, int j, double x, double y, double z) {
  const DomainSpec& d = f.domain();
  double s = 0.0;
  thinns::for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const double ph = 2.0 * std::numbers::pi * (m * x / d.l1 + n * y / d.l2 + p * z / d.eps);
    s += (f.at(j, idx) * Complex(std::cos(ph), std::sin(ph))).real();
  });
  return s;
}

// Parseval from the definition: V * sum |c|^2 over all components.
inline double l2_direct(const SpectralField& f) {
  return std::sqrt(f.domain().volume() * f.coeffs().abs2().sum());
}

}  // namespace testutil
