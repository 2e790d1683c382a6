#pragma once

#include "thinns/forcing.hpp"
#include "thinns/run_config.hpp"

#include <ostream>
#include <random>

namespace thinns {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitBlowUp = 3;

inline constexpr const char* kVersion = "1.0.0";

/// Forcing described by the config; `rng` supplies the random profile.
ForcingSpec make_forcing(const ExperimentConfig& cfg, const DomainSpec& domain, std::mt19937_64& rng);

/// Runs the configured scenario and writes its artifacts plus manifest.json
/// into cfg.output_dir. Progress and errors go to `log`. Returns one of the
/// exit codes above; blow-up leaves blowup.json and the last finite state
/// (blowup_state.bin) behind.
int run_scenario(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace thinns
