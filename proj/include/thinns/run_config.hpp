#pragma once

#include "thinns/diagnostics.hpp"
#include "thinns/domain.hpp"
#include "thinns/forcing.hpp"
#include "thinns/initial.hpp"
#include "thinns/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinns {

/// Configuration error; the message starts with "source:line: " when the
/// offending entry came from a file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain-text key=value file. '#' starts a comment; blank lines are skipped.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source);
  /// Throws ConfigError if the file cannot be read.
  static KeyValueConfig load(const std::filesystem::path& path);

  /// Command-line override; later calls win.
  void set(const std::string& key, const std::string& value);
  /// Sets key only when absent; reported as coming from `origin`.
  void set_default(const std::string& key, const std::string& value, const std::string& origin);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  bool empty() const { return values_.empty(); }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// "source:line" for file entries, "override" for set().
  std::string where(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string get(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::map<std::string, std::string> origins_;
};

enum class Scenario { Simulate, Sweep, EstimateConstants, VerifyInequalities, RescaleCheck, Thresholds };
Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

enum class ForcingKind { None, Random, TaylorGreen };

struct ExperimentConfig {
  Scenario scenario = Scenario::Simulate;
  std::filesystem::path output_dir;
  std::uint64_t seed = 1;

  DomainSpec domain;
  SolverConfig solver;

  InitialKind initial = InitialKind::RandomDivFree;
  InitialParams initial_params;

  ForcingKind forcing = ForcingKind::None;
  /// ||f||_2 of the profile before modulation.
  double forcing_amplitude = 0.0;
  /// Restrict a random forcing profile to z-independent modes.
  bool forcing_planar = false;
  Modulation modulation;

  // verify-inequalities
  Regime regime = Regime::Thm2;
  double slack_rel = 1e-6;
  double tail_fraction = 0.25;
  int trajectories = 5;

  // sweep / estimate-constants
  std::vector<double> eps_list;
  std::string inequality = "lemma4-inf";
  int budget = 400;
  /// Sweep in-plane cutoff per unit of l / eps.
  double resolution = 2.0;
  double sweep_l = 1.5;
  int sweep_n3 = 2;
  double alpha = 1.0;
  double hy_p = 4.0;

  // thresholds
  double delta = 0.1;
  double c = 1.0;

  int parallelism = 1;

  /// Every recognised key with its effective value, in key order.
  std::map<std::string, std::string> effective;

  nlohmann::json to_json() const;
  /// FNV-1a of the effective key=value lines.
  std::string hash() const;
};

/// Recognised keys, in the order shown by the usage text.
const std::vector<std::string>& config_keys();

/// Validates and converts. `preset` (thm2 | thm1) fills in defaults for the
/// initial data, forcing and regime of the corresponding closure experiment;
/// explicit keys still win. Unknown keys and malformed or out-of-range values
/// raise ConfigError anchored at the entry's line. The output directory
/// defaults to $THINNS_OUTPUT_ROOT/<scenario> (or ./thinns-out/<scenario>).
ExperimentConfig experiment_from_kv(const KeyValueConfig& kv);

}  // namespace thinns
