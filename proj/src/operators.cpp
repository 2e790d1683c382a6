#include "thinns/operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace thinns {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_vector(const SpectralField& f, const char* what) {
  if (f.components() != 3) throw std::invalid_argument(std::string(what) + ": vector field required");
}

template <class Keep>
SpectralField mode_filter(const SpectralField& f, Keep&& keep) {
  SpectralField out = f;
  out.scale_modes([&](int m, int n, int p) { return keep(m, n, p) ? 1.0 : 0.0; });
  return out;
}

}  // namespace

SpectralField deriv(const SpectralField& f, double alpha) {
  if (alpha == 0.0) return f;
  const DomainSpec& d = f.domain();
  SpectralField out = f;
  out.scale_modes([&](int m, int n, int p) {
    const double k2 = d.k2(m, n, p);
    return k2 > 0.0 ? std::pow(kTwoPi * kTwoPi * k2, 0.5 * alpha) : 0.0;
  });
  return out;
}

SpectralField partial(const SpectralField& f, int axis) {
  const DomainSpec& d = f.domain();
  const std::size_t nm = d.mode_count();
  CoeffArray c = f.coeffs();
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const double k = d.wavevector(m, n, p)[axis];
    for (int j = 0; j < f.components(); ++j) c[j * nm + idx] *= Complex(0.0, kTwoPi * k);
  });
  SpectralField out = SpectralField::zeros(d, f.components());
  for (int j = 0; j < f.components(); ++j) out.component(j) = c.segment(j * nm, nm);
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  const DomainSpec& d = f.domain();
  SpectralField out = f;
  out.scale_modes([&](int m, int n, int p) { return -kTwoPi * kTwoPi * d.k2(m, n, p); });
  return out;
}

SpectralField leray(const SpectralField& f) {
  require_vector(f, "leray");
  const DomainSpec& d = f.domain();
  SpectralField out = f;
  auto c0 = out.component(0);
  auto c1 = out.component(1);
  auto c2 = out.component(2);
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const double k2 = d.k2(m, n, p);
    if (k2 == 0.0) return;
    const Eigen::Vector3d k = d.wavevector(m, n, p);
    const Complex kdotu = k[0] * c0[idx] + k[1] * c1[idx] + k[2] * c2[idx];
    const Complex s = kdotu / k2;
    c0[idx] -= k[0] * s;
    c1[idx] -= k[1] * s;
    c2[idx] -= k[2] * s;
  });
  return out;
}

SpectralField proj_P(const SpectralField& f) {
  return mode_filter(f, [](int, int, int p) { return p == 0; });
}

SpectralField proj_Q(const SpectralField& f) {
  return mode_filter(f, [](int, int, int p) { return p != 0; });
}

SpectralField proj_R(const SpectralField& f) {
  require_vector(f, "proj_R");
  SpectralField out = f;
  out.component(2).setZero();
  return out;
}

SpectralField proj_S(const SpectralField& f) {
  require_vector(f, "proj_S");
  SpectralField out = f;
  out.component(0).setZero();
  out.component(1).setZero();
  return out;
}

SpectralField truncate(const SpectralField& f, const ModeBox& box) {
  return mode_filter(f, [&](int m, int n, int p) { return box.contains(m, n, p); });
}

SpectralField resample(const SpectralField& f, const DomainSpec& target) {
  SpectralField out = SpectralField::zeros(target, f.components());
  const DomainSpec& src = f.domain();
  const std::size_t nt = target.mode_count();
  CoeffArray c = CoeffArray::Zero(static_cast<Eigen::Index>(f.components() * nt));
  for_each_mode(target, [&](int m, int n, int p, std::size_t idx) {
    if (!src.box().contains(m, n, p)) return;
    for (int j = 0; j < f.components(); ++j) c[j * nt + idx] = f.coeff(j, m, n, p);
  });
  for (int j = 0; j < f.components(); ++j) out.component(j) = c.segment(j * nt, nt);
  return out;
}

SpectralField divergence(const SpectralField& u) {
  require_vector(u, "divergence");
  const DomainSpec& d = u.domain();
  SpectralField out = SpectralField::zeros(d, 1);
  auto c = out.component(0);
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const Eigen::Vector3d k = d.wavevector(m, n, p);
    c[idx] = Complex(0.0, kTwoPi) * (k[0] * u.at(0, idx) + k[1] * u.at(1, idx) + k[2] * u.at(2, idx));
  });
  return out;
}

SpectralField gradient(const SpectralField& g) {
  if (g.components() != 1) throw std::invalid_argument("gradient: scalar field required");
  SpectralField out = SpectralField::zeros(g.domain(), 3);
  for (int axis = 0; axis < 3; ++axis) out.component(axis) = partial(g, axis).component(0);
  return out;
}

double max_relative_divergence(const SpectralField& u) {
  require_vector(u, "divergence");
  const DomainSpec& d = u.domain();
  double worst = 0.0;
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const double k2 = d.k2(m, n, p);
    if (k2 == 0.0) return;
    const Eigen::Vector3d k = d.wavevector(m, n, p);
    const Complex kdotu = k[0] * u.at(0, idx) + k[1] * u.at(1, idx) + k[2] * u.at(2, idx);
    const double umag = std::sqrt(std::norm(u.at(0, idx)) + std::norm(u.at(1, idx)) + std::norm(u.at(2, idx)));
    if (umag == 0.0) return;
    worst = std::max(worst, std::abs(kdotu) / (std::sqrt(k2) * umag));
  });
  return worst;
}

bool is_divergence_free(const SpectralField& u, double tol) { return max_relative_divergence(u) <= tol; }

double inner(const SpectralField& a, const SpectralField& b) {
  if (a.components() != b.components() || a.domain().box() != b.domain().box())
    throw std::invalid_argument("inner: incompatible fields");
  return a.domain().volume() * (a.coeffs() * b.coeffs().conjugate()).real().sum();
}

double norm_l2(const SpectralField& f) {
  return std::sqrt(f.domain().volume() * f.coeffs().abs2().sum());
}

double norm_Ds(const SpectralField& f, double alpha) {
  const DomainSpec& d = f.domain();
  const std::size_t nm = d.mode_count();
  double sum = 0.0;
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const double k2 = d.k2(m, n, p);
    if (k2 == 0.0) return;
    double a2 = 0.0;
    for (int j = 0; j < f.components(); ++j) a2 += std::norm(f.coeffs()[j * nm + idx]);
    if (a2 == 0.0) return;
    sum += (alpha == 0.0 ? 1.0 : std::pow(kTwoPi * kTwoPi * k2, alpha)) * a2;
  });
  return std::sqrt(d.volume() * sum);
}

double norm_h1(const SpectralField& f) {
  const double a = norm_l2(f), b = norm_Ds(f, 1.0);
  return std::sqrt(a * a + b * b);
}

double norm_h2(const SpectralField& f) {
  const double a = norm_l2(f), b = norm_Ds(f, 1.0), c = norm_Ds(f, 2.0);
  return std::sqrt(a * a + b * b + c * c);
}

double poincare_constant(const DomainSpec& d, double alpha) {
  return std::pow(kTwoPi * d.min_wavenumber(), -alpha);
}

PhysicalField pointwise_dot(const PhysicalField& a, const PhysicalField& b) {
  if (a.grid != b.grid || a.components() != b.components())
    throw std::invalid_argument("pointwise_dot: incompatible samples");
  PhysicalField out{a.domain, a.grid, (a.values * b.values).rowwise().sum()};
  return out;
}

}  // namespace thinns
