#include "thinns/solver.hpp"

#include "thinns/checkpoint.hpp"
#include "thinns/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace thinns {

Scheme scheme_from_string(const std::string& s) {
  if (s == "etd-rk2") return Scheme::EtdRk2;
  if (s == "etd-rk4") return Scheme::EtdRk4;
  if (s == "imex-cn") return Scheme::ImexCn;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::EtdRk2: return "etd-rk2";
    case Scheme::EtdRk4: return "etd-rk4";
    case Scheme::ImexCn: return "imex-cn";
  }
  return "?";
}

int scheme_order(Scheme s) { return s == Scheme::EtdRk4 ? 4 : 2; }

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("solver: dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("solver: t_end must be nonnegative");
  if (diag_stride < 1) throw std::invalid_argument("solver: diag_stride must be >= 1");
  if (checkpoint_stride < 0) throw std::invalid_argument("solver: checkpoint_stride must be >= 0");
  if (!(cfl_safety > 0.0)) throw std::invalid_argument("solver: cfl_safety must be positive");
}

SpectralField advect(const SpectralField& a, const SpectralField& b, const GridShape& grid) {
  if (a.components() != 3) throw std::invalid_argument("advect: advecting field must be a vector");
  const PhysicalField ap = to_physical(a, grid);
  PhysicalField out{b.domain(), grid, Eigen::ArrayXXd::Zero(static_cast<Eigen::Index>(grid.points()), b.components())};
  for (int axis = 0; axis < 3; ++axis) {
    const PhysicalField g = to_physical(partial(b, axis), grid);
    for (int j = 0; j < b.components(); ++j) out.values.col(j) += ap.values.col(axis) * g.values.col(j);
  }
  return to_spectral(out, b.domain());
}

SpectralField nonlinear_term(const SpectralField& u, bool dealias) {
  if (max_relative_divergence(u) > 1e-10)
    throw std::invalid_argument("nonlinear_term: input is not divergence-free");
  const GridShape grid = dealias ? dealiased_grid(u.domain()) : minimal_grid(u.domain());
  SpectralField n = leray(advect(u, u, grid));
  n *= -1.0;
  return n;
}

double cfl_estimate(const SpectralField& u, double safety) {
  const DomainSpec& d = u.domain();
  const GridShape g = dealiased_grid(d);
  const double h = std::min({d.l1 / g.N1, d.l2 / g.N2, d.eps / g.N3});
  const double umax = sample_sup_norm(to_physical(u, g));
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return safety * h / umax;
}

namespace {

// phi_k(z) = sum_n z^n / (n + k)!, k = 1, 2, 3.
double phi_fn(int k, double z) {
  if (std::abs(z) < 1.0) {
    double term = 1.0, sum = 0.0;
    for (int i = 1; i <= k; ++i) term /= i;
    for (int n = 0; n < 30; ++n) {
      sum += term;
      term *= z / (n + k + 1);
    }
    return sum;
  }
  const double e = std::exp(z);
  switch (k) {
    case 1: return (e - 1.0) / z;
    case 2: return (e - 1.0 - z) / (z * z);
    default: return (e - 1.0 - z - 0.5 * z * z) / (z * z * z);
  }
}

}  // namespace

Integrator::Integrator(const DomainSpec& domain, const SolverConfig& cfg) : domain_(domain), cfg_(cfg) {
  cfg_.validate();
  const Eigen::Index nm = static_cast<Eigen::Index>(domain.mode_count());
  const double h = cfg.dt;
  const double c = -domain.nu * 4.0 * std::numbers::pi * std::numbers::pi;
  Eigen::ArrayXd L(nm);
  for_each_mode(domain, [&](int m, int n, int p, std::size_t idx) { L[static_cast<Eigen::Index>(idx)] = c * domain.k2(m, n, p); });
  E_ = (L * h).exp();
  auto phi_array = [&](int k, double scale) {
    Eigen::ArrayXd out(nm);
    for (Eigen::Index i = 0; i < nm; ++i) out[i] = phi_fn(k, L[i] * h * scale);
    return out;
  };
  switch (cfg.scheme) {
    case Scheme::EtdRk2:
      a1_ = h * phi_array(1, 1.0);
      a2_ = h * phi_array(2, 1.0);
      break;
    case Scheme::EtdRk4: {
      E2_ = (L * h * 0.5).exp();
      h1_ = 0.5 * h * phi_array(1, 0.5);
      const Eigen::ArrayXd p1 = phi_array(1, 1.0), p2 = phi_array(2, 1.0), p3 = phi_array(3, 1.0);
      f1_ = h * (p1 - 3.0 * p2 + 4.0 * p3);
      f2_ = h * (p2 - 2.0 * p3);
      f3_ = h * (4.0 * p3 - p2);
      break;
    }
    case Scheme::ImexCn: {
      const Eigen::ArrayXd denom = 1.0 - 0.5 * h * L;
      E_ = (1.0 + 0.5 * h * L) / denom;
      a1_ = h / denom;
      break;
    }
  }
}

SpectralField Integrator::apply(const Eigen::ArrayXd& w, const SpectralField& u) const {
  SpectralField out = u;
  for (int j = 0; j < 3; ++j) out.component(j) *= w.cast<Complex>();
  return out;
}

SpectralField Integrator::rhs(const SpectralField& u, const ForcingSpec& f, double t) const {
  SpectralField n = nonlinear_term(u, cfg_.dealias);
  if (!f.is_zero()) n += f.evaluate(t);
  return n;
}

RunState Integrator::step(const RunState& s, const ForcingSpec& f) const {
  const double h = cfg_.dt;
  const SpectralField& u = s.u;
  SpectralField next;
  switch (cfg_.scheme) {
    case Scheme::EtdRk2: {
      const SpectralField Nu = rhs(u, f, s.t);
      const SpectralField a = apply(E_, u) + apply(a1_, Nu);
      const SpectralField Na = rhs(a, f, s.t + h);
      next = a + apply(a2_, Na - Nu);
      break;
    }
    case Scheme::EtdRk4: {
      const SpectralField Nu = rhs(u, f, s.t);
      const SpectralField Eu = apply(E2_, u);
      const SpectralField a = Eu + apply(h1_, Nu);
      const SpectralField Na = rhs(a, f, s.t + 0.5 * h);
      const SpectralField b = Eu + apply(h1_, Na);
      const SpectralField Nb = rhs(b, f, s.t + 0.5 * h);
      const SpectralField c = apply(E2_, a) + apply(h1_, 2.0 * Nb - Nu);
      const SpectralField Nc = rhs(c, f, s.t + h);
      next = apply(E_, u) + apply(f1_, Nu) + apply(f2_, 2.0 * (Na + Nb)) + apply(f3_, Nc);
      break;
    }
    case Scheme::ImexCn: {
      const SpectralField Nu = rhs(u, f, s.t);
      const SpectralField Eu = apply(E_, u);
      const SpectralField star = Eu + apply(a1_, Nu);
      const SpectralField Ns = rhs(star, f, s.t + h);
      next = Eu + apply(0.5 * a1_, Nu + Ns);
      break;
    }
  }
  next.pin_mean();
  if (!next.all_finite() || next.max_abs() > kBlowUpThreshold) {
    BlowUpReport r;
    r.t = s.t + h;
    r.step = s.step + 1;
    r.reason = next.all_finite() ? "coefficient magnitude above 1e12" : "non-finite coefficient";
    r.l2 = norm_l2(u);
    r.h1 = norm_h1(u);
    r.max_coeff = u.max_abs();
    throw BlowUpError(r);
  }
  return {std::move(next), s.t + h, s.step + 1};
}

RunState step(const RunState& state, const ForcingSpec& f, const SolverConfig& cfg) {
  return Integrator(state.u.domain(), cfg).step(state, f);
}

RunResult run(const SpectralField& u0, const ForcingSpec& f, const SolverConfig& cfg) {
  cfg.validate();
  if (u0.components() != 3) throw std::invalid_argument("run: vector field required");
  if (max_relative_divergence(u0) > 1e-10) throw std::invalid_argument("run: initial data is not divergence-free");
  const double bound = cfl_estimate(u0, cfg.cfl_safety);
  if (cfg.dt > bound)
    throw std::invalid_argument("run: dt=" + std::to_string(cfg.dt) + " exceeds stability bound " +
                                std::to_string(bound));

  const Integrator integrator(u0.domain(), cfg);
  const auto nsteps = static_cast<std::int64_t>(std::llround(cfg.t_end / cfg.dt));
  RunResult result;
  RunState state{u0, 0.0, 0};
  state.u.pin_mean();

  auto sample = [&](const RunState& s) {
    result.series.samples.push_back(compute_sample(s.u, s.t, f.norm_at(s.t)));
  };
  auto checkpoint = [&](const RunState& s) -> bool {
    if (cfg.checkpoint_stride == 0 || s.step % cfg.checkpoint_stride != 0) return true;
    char name[64];
    std::snprintf(name, sizeof name, "ckpt_%08lld.bin", static_cast<long long>(s.step));
    const auto path = cfg.checkpoint_dir / name;
    try {
      write_checkpoint(path, Checkpoint{s.u, s.t, s.step, {}});
    } catch (const std::exception& e) {
      result.io_error = e.what();
      return false;
    }
    result.checkpoints.push_back(path);
    return true;
  };

  sample(state);
  if (!checkpoint(state)) {
    result.final_state = state;
    return result;
  }
  for (std::int64_t n = 0; n < nsteps; ++n) {
    try {
      state = integrator.step(state, f);
    } catch (const BlowUpError& e) {
      result.blow_up = e.report();
      break;
    }
    const double div = max_relative_divergence(state.u);
    result.max_divergence = std::max(result.max_divergence, div);
    if (div > 1e-12) {
      state.u = leray(state.u);
      ++result.reprojections;
    }
    if (state.step % cfg.diag_stride == 0 || n + 1 == nsteps) sample(state);
    if (!checkpoint(state)) break;
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace thinns
