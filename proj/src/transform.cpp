#include "thinns/transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace thinns {
namespace {

// FFTW planning is not thread-safe, execution with new-array calls is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan backward(const GridShape& g) { return get(g, false); }
  fftw_plan forward(const GridShape& g) { return get(g, true); }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  fftw_plan get(const GridShape& g, bool fwd) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(g.N1, g.N2, g.N3, fwd);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t nc = static_cast<std::size_t>(g.N1) * g.N2 * (g.N3 / 2 + 1);
    double* real = fftw_alloc_real(g.points());
    fftw_complex* cplx = fftw_alloc_complex(nc);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = fwd ? fftw_plan_dft_r2c_3d(g.N1, g.N2, g.N3, real, cplx, flags)
                         : fftw_plan_dft_c2r_3d(g.N1, g.N2, g.N3, cplx, real, flags);
    fftw_free(real);
    fftw_free(cplx);
    if (!plan) throw std::runtime_error("fftw: planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int, bool>, fftw_plan> plans_;
};

int wrap(int k, int N) { return k >= 0 ? k : k + N; }

void require_capacity(const DomainSpec& d, const GridShape& g) {
  if (g.N1 < d.extent1() || g.N2 < d.extent2() || g.N3 < d.extent3())
    throw std::invalid_argument("transform: grid smaller than spectrum (truncation)");
}

GridShape per_axis(const DomainSpec& d, auto&& count) {
  return {count(d.n1), count(d.n2), count(d.n3)};
}

}  // namespace

int good_fft_size(int n) {
  if (n <= 1) return 1;
  for (int c = n;; ++c) {
    int r = c;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return c;
  }
}

GridShape scaled_grid(const DomainSpec& d, double factor) {
  return per_axis(d, [factor](int n) {
    return n == 0 ? 1 : good_fft_size(static_cast<int>(std::ceil(factor * (2 * n + 1) - 1e-9)));
  });
}

GridShape minimal_grid(const DomainSpec& d) {
  return per_axis(d, [](int n) { return 2 * n + 1; });
}

GridShape dealiased_grid(const DomainSpec& d) { return scaled_grid(d, 1.5); }

GridShape product_exact_grid(const DomainSpec& d, int q) {
  return per_axis(d, [q](int n) { return n == 0 ? 1 : good_fft_size(q * n + 1); });
}

Eigen::Vector3d PhysicalField::position(std::size_t row) const {
  const std::size_t i3 = row % grid.N3;
  const std::size_t i2 = (row / grid.N3) % grid.N2;
  const std::size_t i1 = row / (static_cast<std::size_t>(grid.N3) * grid.N2);
  return {domain.l1 * i1 / grid.N1, domain.l2 * i2 / grid.N2, domain.eps * i3 / grid.N3};
}

PhysicalField to_physical(const SpectralField& f, const GridShape& grid) {
  const DomainSpec& d = f.domain();
  require_capacity(d, grid);
  const int Nh = grid.N3 / 2 + 1;
  const std::size_t nc = static_cast<std::size_t>(grid.N1) * grid.N2 * Nh;
  PhysicalField out{d, grid, Eigen::ArrayXXd(static_cast<Eigen::Index>(grid.points()), f.components())};
  std::vector<Complex> half(nc);
  fftw_plan plan = PlanCache::instance().backward(grid);
  for (int j = 0; j < f.components(); ++j) {
    std::fill(half.begin(), half.end(), Complex(0.0));
    for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
      if (p < 0) return;
      const std::size_t pos = (static_cast<std::size_t>(wrap(m, grid.N1)) * grid.N2 + wrap(n, grid.N2)) * Nh + p;
      half[pos] = f.at(j, idx);
    });
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(half.data()), out.values.col(j).data());
  }
  return out;
}

SpectralField to_spectral(const PhysicalField& u, const DomainSpec& domain) {
  const GridShape& grid = u.grid;
  require_capacity(domain, grid);
  const int Nh = grid.N3 / 2 + 1;
  const std::size_t nc = static_cast<std::size_t>(grid.N1) * grid.N2 * Nh;
  const double norm = 1.0 / static_cast<double>(grid.points());
  std::vector<Complex> half(nc);
  std::vector<double> real(grid.points());
  fftw_plan plan = PlanCache::instance().forward(grid);
  const int ncomp = u.components();
  CoeffArray coeffs(static_cast<Eigen::Index>(ncomp * domain.mode_count()));
  const std::size_t nm = domain.mode_count();
  for (int j = 0; j < ncomp; ++j) {
    Eigen::Map<Eigen::ArrayXd>(real.data(), static_cast<Eigen::Index>(real.size())) = u.values.col(j);
    fftw_execute_dft_r2c(plan, real.data(), reinterpret_cast<fftw_complex*>(half.data()));
    for_each_mode(domain, [&](int m, int n, int p, std::size_t idx) {
      const bool flip = p < 0;
      const int mm = flip ? -m : m, nn = flip ? -n : n, pp = flip ? -p : p;
      const std::size_t pos = (static_cast<std::size_t>(wrap(mm, grid.N1)) * grid.N2 + wrap(nn, grid.N2)) * Nh + pp;
      const Complex c = half[pos] * norm;
      coeffs[j * nm + idx] = flip ? std::conj(c) : c;
    });
  }
  SpectralField f = SpectralField::zeros(domain, ncomp);
  for (int j = 0; j < ncomp; ++j) f.component(j) = coeffs.segment(j * nm, nm);
  f.symmetrize();
  return f;
}

double integrate(const PhysicalField& u, int j) { return u.values.col(j).sum() * u.cell_volume(); }

double quadrature_lp_norm(const PhysicalField& u, double p) {
  const Eigen::ArrayXd mag2 = u.values.square().rowwise().sum();
  if (p == 2.0) return std::sqrt(mag2.sum() * u.cell_volume());
  if (p == 4.0) return std::pow(mag2.square().sum() * u.cell_volume(), 0.25);
  return std::pow(mag2.pow(p / 2.0).sum() * u.cell_volume(), 1.0 / p);
}

double sample_sup_norm(const PhysicalField& u) {
  return std::sqrt(u.values.square().rowwise().sum().maxCoeff());
}

}  // namespace thinns
