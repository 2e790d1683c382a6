#include "thinns/inequality_lab.hpp"

#include "thinns/operators.hpp"
#include "thinns/transform.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace thinns {

LabInequality lab_inequality_from_string(const std::string& s) {
  if (s == "lemma4-inf") return LabInequality::Lemma4Inf;
  if (s == "lemma4-4") return LabInequality::Lemma4L4;
  if (s == "lemma6") return LabInequality::Lemma6;
  if (s == "poincare") return LabInequality::Poincare;
  if (s == "hausdorff-young") return LabInequality::HausdorffYoung;
  throw std::invalid_argument("unknown inequality '" + s + "'");
}

std::string to_string(LabInequality k) {
  switch (k) {
    case LabInequality::Lemma4Inf: return "lemma4-inf";
    case LabInequality::Lemma4L4: return "lemma4-4";
    case LabInequality::Lemma6: return "lemma6";
    case LabInequality::Poincare: return "poincare";
    case LabInequality::HausdorffYoung: return "hausdorff-young";
  }
  return "?";
}

double eps_power(LabInequality k) {
  if (k == LabInequality::Lemma4Inf) return 0.5;
  if (k == LabInequality::Lemma4L4) return 0.25;
  return 0.0;
}

namespace {

bool thin_only(LabInequality k) { return k == LabInequality::Lemma4Inf || k == LabInequality::Lemma4L4; }

bool admissible(LabInequality k, int p) { return !thin_only(k) || p != 0; }

// Largest grid within the point budget, starting from `factor` times 2n+1.
GridShape capped_grid(const DomainSpec& d, double factor, std::size_t max_points) {
  GridShape g = scaled_grid(d, factor);
  while (factor > 1.0 && g.points() > max_points) {
    factor = std::max(1.0, factor / 2.0);
    g = scaled_grid(d, factor);
  }
  return g;
}

// Grid on which the integral of |f|^q is exact, or the finest affordable one.
GridShape power_grid(const DomainSpec& d, double q, const LabOptions& o) {
  const double qi = std::round(q);
  if (std::abs(q - qi) < 1e-12 && static_cast<int>(qi) % 2 == 0) {
    const GridShape g = product_exact_grid(d, static_cast<int>(qi));
    if (g.points() <= o.max_grid_points) return g;
  }
  return capped_grid(d, o.oversample, o.max_grid_points);
}

SpectralField admissible_part(LabInequality k, const SpectralField& f) {
  return thin_only(k) ? proj_Q(f) : f;
}

}  // namespace

double lab_ratio(LabInequality k, const SpectralField& f0, const LabOptions& o) {
  if (f0.components() != 1) throw std::invalid_argument("lab_ratio: scalar field required");
  const SpectralField f = admissible_part(k, f0);
  const DomainSpec& d = f.domain();
  switch (k) {
    case LabInequality::Lemma4Inf: {
      const double den = norm_Ds(f, 2.0);
      if (den == 0.0) return 0.0;
      return sample_sup_norm(to_physical(f, capped_grid(d, o.oversample, o.max_grid_points))) / den;
    }
    case LabInequality::Lemma4L4: {
      const double den = norm_Ds(f, 1.0);
      if (den == 0.0) return 0.0;
      return quadrature_lp_norm(to_physical(f, power_grid(d, 4.0, o)), 4.0) / den;
    }
    case LabInequality::Lemma6: {
      if (d.n3 != 0) throw std::invalid_argument("lemma6: planar domain (n3 = 0) required");
      const double den = norm_Ds(f, 0.5) / std::sqrt(d.eps);
      if (den == 0.0) return 0.0;
      return quadrature_lp_norm(to_physical(f, power_grid(d, 4.0, o)), 4.0) / std::pow(d.eps, 0.25) / den;
    }
    case LabInequality::Poincare: {
      const double den = norm_Ds(f, o.alpha);
      return den == 0.0 ? 0.0 : norm_l2(f) / den;
    }
    case LabInequality::HausdorffYoung: {
      const double p = o.hy_p;
      if (!(p >= 2.0)) throw std::invalid_argument("hausdorff-young: p must be >= 2");
      const double pc = p / (p - 1.0);
      double s = 0.0;
      for (Eigen::Index i = 0; i < f.coeffs().size(); ++i) s += std::pow(std::abs(f.coeffs()[i]), pc);
      if (s == 0.0) return 0.0;
      const double den = std::pow(d.volume(), 1.0 / p) * std::pow(s, 1.0 / pc);
      const double num = p == 2.0 ? norm_l2(f) : quadrature_lp_norm(to_physical(f, power_grid(d, p, o)), p);
      return num / den;
    }
  }
  return 0.0;
}

double sup_inequality_sharp_constant(const DomainSpec& d) {
  double s = 0.0;
  for_each_mode(d, [&](int m, int n, int p, std::size_t) {
    if (p == 0) return;
    s += 1.0 / std::pow(d.k2(m, n, p), 2);
  });
  return std::sqrt(s) / (4.0 * std::numbers::pi * std::numbers::pi * std::sqrt(d.volume()));
}

namespace {

struct Mode {
  int m, n, p;
  double k;  // |k| / kref
};

enum class Ensemble { White, Power1, Power2, Coherent, CoherentGauss, Block, Single };
constexpr Ensemble kEnsembles[] = {Ensemble::White,         Ensemble::Power1, Ensemble::Power2, Ensemble::Coherent,
                                   Ensemble::CoherentGauss, Ensemble::Block,  Ensemble::Single};

const char* ensemble_name(Ensemble e) {
  switch (e) {
    case Ensemble::White: return "white";
    case Ensemble::Power1: return "power-law-1";
    case Ensemble::Power2: return "power-law-2";
    case Ensemble::Coherent: return "coherent-power-law";
    case Ensemble::CoherentGauss: return "coherent-gaussian";
    case Ensemble::Block: return "single-block";
    case Ensemble::Single: return "single-mode";
  }
  return "?";
}

// One representative per conjugate pair: the first half of storage.
std::vector<Mode> representatives(LabInequality k, const DomainSpec& d) {
  std::vector<Mode> modes;
  const std::size_t half = d.mode_count() / 2;
  double kref = std::numeric_limits<double>::infinity();
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    if (idx >= half || !admissible(k, p)) return;
    const double kk = std::sqrt(d.k2(m, n, p));
    kref = std::min(kref, kk);
    modes.push_back({m, n, p, kk});
  });
  for (auto& md : modes) md.k /= kref;
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.k < b.k; });
  return modes;
}

SpectralField draw_trial(Ensemble e, int draw, const DomainSpec& d, const std::vector<Mode>& modes,
                         std::mt19937_64& rng) {
  SpectralField f = SpectralField::zeros(d, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto phase = [&] {
    const double a = 2.0 * std::numbers::pi * uni(rng);
    return Complex(std::cos(a), std::sin(a));
  };
  const double kmax = modes.back().k;
  switch (e) {
    case Ensemble::White:
    case Ensemble::Power1:
    case Ensemble::Power2: {
      const double slope = e == Ensemble::White ? 0.0 : e == Ensemble::Power1 ? -1.0 : -2.0;
      for (const auto& md : modes) {
        const double sd = std::pow(md.k, slope);
        f.set_mode(0, md.m, md.n, md.p, sd * Complex(gauss(rng), gauss(rng)));
      }
      break;
    }
    case Ensemble::Coherent: {
      static constexpr double slopes[] = {4.0, 3.0, 2.5, 2.0, 1.5, 1.0};
      const double s = slopes[draw % 6] * (draw < 6 ? 1.0 : 0.8 + 0.4 * uni(rng));
      for (const auto& md : modes) f.set_mode(0, md.m, md.n, md.p, std::pow(md.k, -s));
      break;
    }
    case Ensemble::CoherentGauss: {
      const double width = std::exp(std::log(0.5) + uni(rng) * std::log(std::max(2.0, kmax)));
      for (const auto& md : modes) f.set_mode(0, md.m, md.n, md.p, std::exp(-std::pow(md.k / width, 2)));
      break;
    }
    case Ensemble::Block: {
      const int jmax = std::max(0, static_cast<int>(std::floor(std::log2(kmax))));
      const int j = static_cast<int>(uni(rng) * (jmax + 1)) % (jmax + 1);
      const bool coherent = draw % 2 == 0;
      const double lo = std::ldexp(1.0, j), hi = 2.0 * lo;
      for (const auto& md : modes)
        if (md.k >= lo && md.k < hi) f.set_mode(0, md.m, md.n, md.p, coherent ? Complex(1.0) : phase());
      break;
    }
    case Ensemble::Single: {
      // The first draw is the lowest admissible mode; later ones favour low |k|.
      std::size_t i = 0;
      if (draw > 0) {
        const double u = uni(rng);
        i = std::min(modes.size() - 1, static_cast<std::size_t>(u * u * u * static_cast<double>(modes.size())));
      }
      f.set_mode(0, modes[i].m, modes[i].n, modes[i].p, phase());
      break;
    }
  }
  return f;
}

struct Candidate {
  double ratio = -1.0;
  long index = -1;
  SpectralField field;
};

}  // namespace

ConstantEstimate estimate_constant(LabInequality k, const DomainSpec& domain, const LabOptions& o) {
  if (o.budget < 1) throw std::invalid_argument("estimate_constant: budget must be >= 1");
  if (k == LabInequality::Lemma6 && domain.n3 != 0)
    throw std::invalid_argument("lemma6: planar domain (n3 = 0) required");
  const std::vector<Mode> modes = representatives(k, domain);
  if (modes.empty()) throw std::invalid_argument("estimate_constant: no admissible modes in the box");

  const int nens = static_cast<int>(std::size(kEnsembles));
  const int refine_budget = o.budget > nens ? static_cast<int>(o.refine_fraction * o.budget) : 0;
  const int trials = std::max(1, o.budget - refine_budget);

  ConstantEstimate est;
  est.inequality = k;
  est.domain = domain;
  est.trials = trials;
  for (Ensemble e : kEnsembles) est.ensembles.push_back({ensemble_name(e), 0, 0.0});

  // Trial i uses ensemble i mod nens and its own seeded generator, so the
  // result does not depend on the thread count.
  const int nthreads = std::max(1, std::min(o.threads, trials));
  std::vector<Candidate> best(nthreads);
  std::vector<std::vector<double>> ens_best(nthreads, std::vector<double>(nens, 0.0));
  auto worker = [&](int tid) {
    for (int i = tid; i < trials; i += nthreads) {
      const Ensemble e = kEnsembles[i % nens];
      std::mt19937_64 rng(o.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i));
      SpectralField f = draw_trial(e, i / nens, domain, modes, rng);
      const double r = lab_ratio(k, f, o);
      ens_best[tid][i % nens] = std::max(ens_best[tid][i % nens], r);
      if (r > best[tid].ratio) best[tid] = {r, i, std::move(f)};
    }
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  Candidate top;
  for (auto& c : best)
    if (c.ratio > top.ratio || (c.ratio == top.ratio && c.index < top.index)) top = std::move(c);
  for (int e = 0; e < nens; ++e) {
    est.ensembles[e].trials = trials / nens + (e < trials % nens ? 1 : 0);
    for (int t = 0; t < nthreads; ++t) est.ensembles[e].best_ratio = std::max(est.ensembles[e].best_ratio, ens_best[t][e]);
  }
  est.ratio_before_refinement = top.ratio;
  int evals = trials;

  // Cyclic coordinate ascent on the largest coefficients of the best trial.
  SpectralField x = admissible_part(k, top.field);
  double fx = top.ratio;
  if (refine_budget > 0 && fx > 0.0) {
    std::vector<std::pair<double, const Mode*>> mag;
    for (const auto& md : modes) mag.push_back({std::abs(x.coeff(0, md.m, md.n, md.p)), &md});
    const std::size_t kc = std::min<std::size_t>(std::max(1, o.refine_coefficients), mag.size());
    std::partial_sort(mag.begin(), mag.begin() + static_cast<long>(kc), mag.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    double step = 0.25 * std::max(mag.front().first, 1e-300);
    const double floor_step = 1e-6 * step;
    int left = refine_budget;
    while (left > 0 && step > floor_step) {
      bool improved = false;
      for (std::size_t c = 0; c < kc && left > 0; ++c) {
        const Mode& md = *mag[c].second;
        for (const Complex dir : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)}) {
          if (left <= 0) break;
          SpectralField y = x;
          y.set_mode(0, md.m, md.n, md.p, x.coeff(0, md.m, md.n, md.p) + step * dir);
          const double fy = lab_ratio(k, y, o);
          --left;
          ++evals;
          if (fy > fx) {
            x = std::move(y);
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }
  est.evaluations = evals;
  est.max_ratio = fx;
  est.maximizer = x;
  const double pw = eps_power(k);
  est.normalized_ratio = pw > 0.0 ? fx / std::pow(domain.eps, pw) : 0.0;
  return est;
}

nlohmann::json ConstantEstimate::to_json() const {
  nlohmann::json j;
  j["inequality"] = to_string(inequality);
  j["domain"] = {{"l1", domain.l1}, {"l2", domain.l2}, {"eps", domain.eps},
                 {"n1", domain.n1}, {"n2", domain.n2}, {"n3", domain.n3}};
  j["evaluations"] = evaluations;
  j["trials"] = trials;
  j["max_ratio"] = max_ratio;
  j["normalized_ratio"] = normalized_ratio;
  j["eps_power"] = eps_power(inequality);
  j["ratio_before_refinement"] = ratio_before_refinement;
  j["ensembles"] = nlohmann::json::array();
  for (const auto& e : ensembles)
    j["ensembles"].push_back({{"name", e.ensemble}, {"trials", e.trials}, {"best_ratio", e.best_ratio}});
  return j;
}

nlohmann::json ScalingFit::to_json() const {
  return {{"slope", slope}, {"intercept", intercept}, {"slope_stderr", slope_stderr}, {"r_squared", r_squared},
          {"points", points}};
}

ScalingFit fit_eps_scaling(const std::vector<double>& eps, const std::vector<double>& ratios) {
  if (eps.size() != ratios.size()) throw std::invalid_argument("fit_eps_scaling: size mismatch");
  if (eps.size() < 3) throw std::invalid_argument("fit_eps_scaling: at least 3 points required");
  const Eigen::Index n = static_cast<Eigen::Index>(eps.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(ratios[i] > 0.0)) throw std::invalid_argument("fit_eps_scaling: values must be positive");
    A(i, 0) = std::log(eps[i]);
    A(i, 1) = 1.0;
    y[i] = std::log(ratios[i]);
  }
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd res = y - A * beta;
  ScalingFit fit;
  fit.slope = beta[0];
  fit.intercept = beta[1];
  fit.points = static_cast<int>(n);
  const double sse = res.squaredNorm();
  const double mx = A.col(0).mean();
  const double sxx = (A.col(0).array() - mx).square().sum();
  fit.slope_stderr = n > 2 && sxx > 0.0 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  const double sst = (y.array() - y.mean()).square().sum();
  fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  return fit;
}

DomainSpec sweep_domain(double l, double eps, double modes_per_eps, int n3) {
  DomainSpec d;
  d.l1 = d.l2 = l;
  d.eps = eps;
  d.nu = 1.0;
  d.n1 = d.n2 = static_cast<int>(std::ceil(modes_per_eps * l / eps - 1e-9));
  d.n3 = n3;
  d.validate();
  return d;
}

DyadicProfile dyadic_decompose(const SpectralField& f) {
  if (f.components() != 1) throw std::invalid_argument("dyadic_decompose: scalar field required");
  const DomainSpec& d = f.domain();
  DyadicProfile out;
  double below = 0.0, weighted_r = 0.0;
  for_each_mode(d, [&](int m, int n, int p, std::size_t idx) {
    const double c2 = std::norm(f.at(0, idx));
    if (c2 == 0.0) return;
    if (p != 0) throw std::invalid_argument("dyadic_decompose: planar field required");
    if (m == 0 && n == 0) return;
    const double r = std::hypot(m / d.l1, n / d.l2);
    out.mode_energy += c2;
    weighted_r += r * c2;
    if (r < 1.0) {
      below += c2;
      return;
    }
    // Guard the floor against r landing a hair below a power of two.
    int j = static_cast<int>(std::floor(std::log2(r) + 1e-12));
    if (std::ldexp(1.0, j) > r) --j;
    if (static_cast<int>(out.A.size()) <= j) out.A.resize(j + 1, 0.0);
    out.A[j] += c2;
  });
  out.below_unit = std::sqrt(below);
  out.block_energy = below;
  for (std::size_t j = 0; j < out.A.size(); ++j) {
    out.block_energy += out.A[j];
    out.weighted_sum += std::ldexp(1.0, static_cast<int>(j)) * out.A[j];
    out.A[j] = std::sqrt(out.A[j]);
  }
  out.d_half_sq = d.l1 * d.l2 * 2.0 * std::numbers::pi * weighted_r;
  out.multiplier_constant = 1.0 / (2.0 * std::numbers::pi * d.l1 * d.l2);
  return out;
}

}  // namespace thinns
