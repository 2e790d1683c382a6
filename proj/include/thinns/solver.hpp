#pragma once

#include "thinns/diagnostics.hpp"
#include "thinns/forcing.hpp"
#include "thinns/spectral_field.hpp"
#include "thinns/transform.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinns {

enum class Scheme { EtdRk2, EtdRk4, ImexCn };

Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);
/// Formal order of accuracy.
int scheme_order(Scheme s);

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::EtdRk2;
  bool dealias = true;
  int diag_stride = 1;
  /// C in dt <= C * min spacing / max |u|.
  double cfl_safety = 0.5;
  /// 0 disables checkpoints.
  int checkpoint_stride = 0;
  std::filesystem::path checkpoint_dir;

  void validate() const;
};

struct RunState {
  SpectralField u;
  double t = 0.0;
  std::int64_t step = 0;
};

struct BlowUpReport {
  double t = 0.0;
  std::int64_t step = 0;
  std::string reason;
  /// Norms of the last finite state.
  double l2 = 0.0, h1 = 0.0, max_coeff = 0.0;
};

class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(BlowUpReport r)
      : std::runtime_error("blow-up at t=" + std::to_string(r.t) + ": " + r.reason), report_(std::move(r)) {}
  const BlowUpReport& report() const { return report_; }

 private:
  BlowUpReport report_;
};

/// Coefficient magnitude beyond which a state counts as blown up.
inline constexpr double kBlowUpThreshold = 1e12;

/// (a . grad) b, formed from pointwise products on `grid` and truncated to the
/// mode box of b.
SpectralField advect(const SpectralField& a, const SpectralField& b, const GridShape& grid);

/// -L(u . grad u), products on the 3/2-padded grid (dealias) or the minimal
/// grid. Throws std::invalid_argument if u is not divergence-free (1e-10).
SpectralField nonlinear_term(const SpectralField& u, bool dealias = true);

/// C * min grid spacing / max |u| on the dealiased grid; +inf for u = 0.
double cfl_estimate(const SpectralField& u, double safety = 0.5);

/// Precomputed exponential/implicit multipliers for one (domain, dt, scheme).
class Integrator {
 public:
  Integrator(const DomainSpec& domain, const SolverConfig& cfg);

  /// Advances one step. Throws BlowUpError on NaN or |coeff| > 1e12.
  RunState step(const RunState& s, const ForcingSpec& f) const;

 private:
  SpectralField rhs(const SpectralField& u, const ForcingSpec& f, double t) const;
  SpectralField apply(const Eigen::ArrayXd& w, const SpectralField& u) const;

  DomainSpec domain_;
  SolverConfig cfg_;
  // Per-mode multipliers; meaning depends on scheme.
  Eigen::ArrayXd E_, E2_, a1_, a2_, f1_, f2_, f3_, h1_;
};

RunState step(const RunState& state, const ForcingSpec& f, const SolverConfig& cfg);

struct RunResult {
  DiagnosticSeries series;
  RunState final_state;
  std::vector<std::filesystem::path> checkpoints;
  std::optional<BlowUpReport> blow_up;
  /// Set when a checkpoint could not be written; the run stops there.
  std::optional<std::string> io_error;
  double max_divergence = 0.0;
  std::int64_t reprojections = 0;

  bool ok() const { return !blow_up && !io_error; }
};

/// Integrates to t_end sampling diagnostics every diag_stride steps (and at
/// the end). Throws std::invalid_argument if u0 is not divergence-free or dt
/// exceeds the stability bound; blow-up and I/O failures are reported in the
/// result with the partial series kept.
RunResult run(const SpectralField& u0, const ForcingSpec& f, const SolverConfig& cfg);

}  // namespace thinns
