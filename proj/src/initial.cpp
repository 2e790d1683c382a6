#include "thinns/initial.hpp"

#include "thinns/operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace thinns {

InitialKind initial_kind_from_string(const std::string& s) {
  if (s == "random-divfree") return InitialKind::RandomDivFree;
  if (s == "z-independent") return InitialKind::ZIndependent;
  if (s == "q-perturbed") return InitialKind::QPerturbed;
  if (s == "taylor-green-like") return InitialKind::TaylorGreenLike;
  throw std::invalid_argument("unknown initial kind '" + s + "'");
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::RandomDivFree: return "random-divfree";
    case InitialKind::ZIndependent: return "z-independent";
    case InitialKind::QPerturbed: return "q-perturbed";
    case InitialKind::TaylorGreenLike: return "taylor-green-like";
  }
  return "?";
}

SpectralField random_divfree(const DomainSpec& domain, std::mt19937_64& rng, double slope, double kmax,
                             bool planar, bool thin_only) {
  SpectralField f = SpectralField::zeros(domain, 3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double kmin = domain.min_wavenumber();
  // Visit each conjugate pair once (first half of storage) so draws are
  // independent of the pair partner.
  const std::size_t half = domain.mode_count() / 2;
  for_each_mode(domain, [&](int m, int n, int p, std::size_t idx) {
    if (idx >= half) return;
    if (planar && p != 0) return;
    if (thin_only && p == 0) return;
    const double k = std::sqrt(domain.k2(m, n, p));
    if (k > kmax) return;
    const double sd = std::pow(k / kmin, slope);
    for (int j = 0; j < 3; ++j) {
      const double re = gauss(rng), im = gauss(rng);
      f.set_mode(j, m, n, p, sd * Complex(re, im));
    }
  });
  return leray(f);
}

namespace {

SpectralField normalised(SpectralField f, double target) {
  const double h1 = norm_h1(f);
  if (target == 0.0) return SpectralField::zeros(f.domain(), 3);
  if (h1 == 0.0) throw std::invalid_argument("initial: empty spectrum");
  f *= target / h1;
  return f;
}

SpectralField taylor_green(const DomainSpec& d, int pz) {
  if (std::abs(pz) > d.n3) throw std::invalid_argument("initial: tg_p outside the mode box");
  // u = (a sin X cos Y cos Z, b cos X sin Y cos Z, 0), a/l1 + b/l2 = 0.
  const double a = 1.0, b = -a * d.l2 / d.l1;
  SpectralField f = SpectralField::zeros(d, 3);
  const double zfac = pz == 0 ? 1.0 : 0.5;
  const std::vector<int> zsigns = pz == 0 ? std::vector<int>{1} : std::vector<int>{-1, 1};
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : zsigns) {
        // sin X = (e^{iX} - e^{-iX}) / 2i, cos X = (e^{iX} + e^{-iX}) / 2.
        const Complex sinx = sx > 0 ? Complex(0, -0.5) : Complex(0, 0.5);
        const Complex siny = sy > 0 ? Complex(0, -0.5) : Complex(0, 0.5);
        const Complex c1 = a * sinx * 0.5 * zfac;
        const Complex c2 = b * 0.5 * siny * zfac;
        const int p = sz * pz;
        if (sx > 0) {
          f.set_mode(0, sx, sy, p, c1);
          f.set_mode(1, sx, sy, p, c2);
        }
      }
  return f;
}

}  // namespace

SpectralField make_initial(const DomainSpec& domain, InitialKind kind, const InitialParams& params) {
  std::mt19937_64 rng(params.seed);
  switch (kind) {
    case InitialKind::RandomDivFree:
      return normalised(random_divfree(domain, rng, params.slope, params.kmax, false), params.amplitude);
    case InitialKind::ZIndependent:
      return normalised(random_divfree(domain, rng, params.slope, params.kmax, true), params.amplitude);
    case InitialKind::QPerturbed: {
      SpectralField base = random_divfree(domain, rng, params.slope, params.kmax, true);
      SpectralField pert = random_divfree(domain, rng, params.slope, params.kmax, false, true);
      const double hb = norm_h1(base), hq = norm_h1(pert);
      if (hb == 0.0 || hq == 0.0) {
        if (params.amplitude == 0.0) return SpectralField::zeros(domain, 3);
        throw std::invalid_argument("initial: empty spectrum");
      }
      pert *= params.q_fraction * hb / hq;
      return normalised(base + pert, params.amplitude);
    }
    case InitialKind::TaylorGreenLike:
      return normalised(taylor_green(domain, params.tg_p), params.amplitude);
  }
  throw std::invalid_argument("initial: unknown kind");
}

}  // namespace thinns
