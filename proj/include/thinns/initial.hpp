#pragma once

#include "thinns/spectral_field.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <string>

namespace thinns {

enum class InitialKind { RandomDivFree, ZIndependent, QPerturbed, TaylorGreenLike };

InitialKind initial_kind_from_string(const std::string& s);
std::string to_string(InitialKind k);

struct InitialParams {
  /// Target ||u||_{H^1}.
  double amplitude = 0.1;
  /// Coefficient standard deviation ~ (|k| / min|k|)^slope.
  double slope = -2.0;
  /// Only modes with |k| <= kmax are excited.
  double kmax = std::numeric_limits<double>::infinity();
  /// QPerturbed: ||Qu||_{H^1} / ||Pu||_{H^1}.
  double q_fraction = 0.25;
  /// TaylorGreenLike: thin-direction index of the cos(2 pi p z / eps) factor.
  int tg_p = 1;
  std::uint64_t seed = 1;
};

/// Divergence-free, mean-zero, Hermitian field with ||u||_{H^1} equal to
/// params.amplitude (to roundoff). Throws std::invalid_argument when the
/// requested spectrum selects no mode.
SpectralField make_initial(const DomainSpec& domain, InitialKind kind, const InitialParams& params);

/// Gaussian random vector field on the selected modes, Leray-projected but
/// not normalised. `planar` restricts to p = 0, `thin_only` to p != 0.
SpectralField random_divfree(const DomainSpec& domain, std::mt19937_64& rng, double slope, double kmax,
                             bool planar, bool thin_only = false);

}  // namespace thinns
