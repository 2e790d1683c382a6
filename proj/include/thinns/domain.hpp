#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>

namespace thinns {

/// Retained Fourier index box |m| <= n1, |n| <= n2, |p| <= n3.
struct ModeBox {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;

  bool contains(int m, int n, int p) const {
    return m >= -n1 && m <= n1 && n >= -n2 && n <= n2 && p >= -n3 && p <= n3;
  }
  bool operator==(const ModeBox&) const = default;
};

/// Thin periodic box [0,l1] x [0,l2] x [0,eps] with viscosity and the
/// Galerkin cutoff. n3 == 0 denotes the z-independent (planar) subspace.
struct DomainSpec {
  double l1 = 1.0;
  double l2 = 1.0;
  double eps = 0.125;
  double nu = 1.0;
  int n1 = 8;
  int n2 = 8;
  int n3 = 2;

  /// Throws std::invalid_argument when a standing assumption is violated.
  void validate() const;

  ModeBox box() const { return {n1, n2, n3}; }
  int extent1() const { return 2 * n1 + 1; }
  int extent2() const { return 2 * n2 + 1; }
  int extent3() const { return 2 * n3 + 1; }
  std::size_t mode_count() const {
    return static_cast<std::size_t>(extent1()) * extent2() * extent3();
  }
  double volume() const { return l1 * l2 * eps; }

  /// Dense index of mode (m,n,p); p runs fastest, then n, then m.
  std::size_t index(int m, int n, int p) const {
    return (static_cast<std::size_t>(m + n1) * extent2() + (n + n2)) * extent3() + (p + n3);
  }
  /// Index of (-m,-n,-p); the symmetric box makes this a reversal.
  std::size_t mirror(std::size_t idx) const { return mode_count() - 1 - idx; }
  std::size_t zero_index() const { return (mode_count() - 1) / 2; }

  /// Physical frequency (m/l1, n/l2, p/eps).
  Eigen::Vector3d wavevector(int m, int n, int p) const {
    return {m / l1, n / l2, p / eps};
  }
  double k2(int m, int n, int p) const {
    const double a = m / l1, b = n / l2, c = p / eps;
    return a * a + b * b + c * c;
  }
  /// Smallest |k| over nonzero retained modes.
  double min_wavenumber() const;

  /// Same geometry with a different cutoff.
  DomainSpec with_modes(int m1, int m2, int m3) const {
    DomainSpec d = *this;
    d.n1 = m1;
    d.n2 = m2;
    d.n3 = m3;
    return d;
  }

  bool operator==(const DomainSpec&) const = default;
};

/// Calls fn(m, n, p, idx) for every mode of the box in storage order.
template <class Fn>
void for_each_mode(const DomainSpec& d, Fn&& fn) {
  std::size_t idx = 0;
  for (int m = -d.n1; m <= d.n1; ++m)
    for (int n = -d.n2; n <= d.n2; ++n)
      for (int p = -d.n3; p <= d.n3; ++p) fn(m, n, p, idx++);
}

std::string to_string(const DomainSpec& d);

}  // namespace thinns
