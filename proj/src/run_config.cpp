#include "thinns/run_config.hpp"

#include "thinns/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace thinns {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig kv;
  kv.source_ = source;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string at = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(at + "expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(at + "empty key");
    if (kv.values_.count(key)) throw ConfigError(at + "duplicate key '" + key + "'");
    kv.values_[key] = trim(line.substr(eq + 1));
    kv.lines_[key] = lineno;
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  lines_.erase(key);
  origins_.erase(key);
}

void KeyValueConfig::set_default(const std::string& key, const std::string& value, const std::string& origin) {
  if (has(key)) return;
  values_[key] = value;
  origins_[key] = origin;
}

std::string KeyValueConfig::where(const std::string& key) const {
  if (const auto o = origins_.find(key); o != origins_.end()) return o->second;
  const auto it = lines_.find(key);
  if (it == lines_.end()) return "override";
  return source_ + ":" + std::to_string(it->second);
}

void KeyValueConfig::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(where(key) + ": " + key + ": " + what);
}

std::string KeyValueConfig::get(const std::string& key, const std::string& def) const {
  const auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  if (!has(key)) return def;
  const std::string& s = values_.at(key);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    fail(key, "expected a number, got '" + s + "'");
  }
  if (used != s.size()) fail(key, "expected a number, got '" + s + "'");
  return v;
}

long long KeyValueConfig::get_int(const std::string& key, long long def) const {
  if (!has(key)) return def;
  const std::string& s = values_.at(key);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    fail(key, "expected an integer, got '" + s + "'");
  }
  if (used != s.size()) fail(key, "expected an integer, got '" + s + "'");
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string& s = values_.at(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(key, "expected true/false, got '" + s + "'");
}

std::vector<double> KeyValueConfig::get_list(const std::string& key, const std::vector<double>& def) const {
  if (!has(key)) return def;
  std::vector<double> out;
  std::stringstream ss(values_.at(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) fail(key, "expected a comma-separated list of numbers");
  }
  return out;
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "simulate") return Scenario::Simulate;
  if (s == "sweep") return Scenario::Sweep;
  if (s == "estimate-constants") return Scenario::EstimateConstants;
  if (s == "verify-inequalities") return Scenario::VerifyInequalities;
  if (s == "rescale-check") return Scenario::RescaleCheck;
  if (s == "thresholds") return Scenario::Thresholds;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Simulate: return "simulate";
    case Scenario::Sweep: return "sweep";
    case Scenario::EstimateConstants: return "estimate-constants";
    case Scenario::VerifyInequalities: return "verify-inequalities";
    case Scenario::RescaleCheck: return "rescale-check";
    case Scenario::Thresholds: return "thresholds";
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "scenario", "preset", "output_dir", "seed", "l1", "l2", "eps", "nu", "n1", "n2", "n3", "dt", "t_end", "scheme",
      "dealias", "diag_stride", "cfl_safety", "checkpoint_stride", "initial", "amplitude", "slope", "kmax",
      "q_fraction", "tg_p", "forcing", "forcing_amplitude", "forcing_planar", "forcing_modulation", "forcing_omega",
      "forcing_phase", "regime", "slack_rel", "tail_fraction", "trajectories", "eps_list", "inequality", "budget",
      "resolution", "sweep_l", "sweep_n3", "alpha", "hy_p", "delta", "c", "parallelism"};
  return keys;
}

ExperimentConfig experiment_from_kv(const KeyValueConfig& input) {
  const auto& keys = config_keys();
  for (const auto& [k, v] : input.values())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) input.fail(k, "unknown key");

  KeyValueConfig kv = input;
  const std::string preset = kv.get("preset", "none");
  if (preset == "thm2") {
    for (auto [k, v] : {std::pair{"initial", "z-independent"}, {"forcing_planar", "true"}, {"regime", "thm2"}})
      kv.set_default(k, v, "preset thm2");
  } else if (preset == "thm1") {
    for (auto [k, v] : {std::pair{"initial", "q-perturbed"}, {"regime", "thm1"}}) kv.set_default(k, v, "preset thm1");
  } else if (preset != "none") {
    kv.fail("preset", "unknown preset '" + preset + "' (none|thm2|thm1)");
  }

  ExperimentConfig c;
  auto& eff = c.effective;
  auto str = [&](const std::string& k, const std::string& def) {
    const std::string v = kv.get(k, def);
    eff[k] = v;
    return v;
  };
  auto num = [&](const std::string& k, double def) {
    const double v = kv.get_double(k, def);
    if (!std::isfinite(v) && !(k == "kmax" && v > 0)) kv.fail(k, "value must be finite");
    eff[k] = fmt(v);
    return v;
  };
  auto integer = [&](const std::string& k, long long def, long long lo, long long hi) {
    const long long v = kv.get_int(k, def);
    if (v < lo || v > hi) kv.fail(k, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + "]");
    eff[k] = std::to_string(v);
    return v;
  };
  auto positive = [&](const std::string& k, double def) {
    const double v = num(k, def);
    if (!(v > 0.0)) kv.fail(k, "value must be positive");
    return v;
  };
  auto boolean = [&](const std::string& k, bool def) {
    const bool v = kv.get_bool(k, def);
    eff[k] = v ? "true" : "false";
    return v;
  };
  // Enum-valued keys: convert, re-anchoring the error at the entry.
  auto choice = [&](const std::string& k, const std::string& def, auto&& conv) {
    const std::string v = str(k, def);
    try {
      return conv(v);
    } catch (const std::invalid_argument& e) {
      kv.fail(k, e.what());
    }
  };

  str("preset", "none");
  c.scenario = choice("scenario", "simulate", scenario_from_string);
  c.seed = static_cast<std::uint64_t>(integer("seed", 1, 0, std::numeric_limits<long long>::max()));

  c.domain.l1 = positive("l1", 1.0);
  c.domain.l2 = positive("l2", 1.0);
  c.domain.eps = positive("eps", 0.125);
  c.domain.nu = positive("nu", 1.0);
  c.domain.n1 = static_cast<int>(integer("n1", 8, 1, 4096));
  c.domain.n2 = static_cast<int>(integer("n2", 8, 1, 4096));
  c.domain.n3 = static_cast<int>(integer("n3", 2, 0, 4096));
  try {
    c.domain.validate();
  } catch (const std::invalid_argument& e) {
    kv.fail(kv.has("eps") ? "eps" : "l1", e.what());
  }

  c.solver.dt = positive("dt", 1e-3);
  c.solver.t_end = positive("t_end", 1.0);
  c.solver.scheme = choice("scheme", "etd-rk2", scheme_from_string);
  c.solver.dealias = boolean("dealias", true);
  c.solver.diag_stride = static_cast<int>(integer("diag_stride", 10, 1, 1 << 30));
  c.solver.cfl_safety = positive("cfl_safety", 0.5);
  c.solver.checkpoint_stride = static_cast<int>(integer("checkpoint_stride", 0, 0, 1 << 30));

  c.initial = choice("initial", "random-divfree", initial_kind_from_string);
  c.initial_params.amplitude = positive("amplitude", 0.1);
  c.initial_params.slope = num("slope", -2.0);
  c.initial_params.kmax = positive("kmax", std::numeric_limits<double>::infinity());
  c.initial_params.q_fraction = num("q_fraction", 0.25);
  if (c.initial_params.q_fraction < 0.0) kv.fail("q_fraction", "value must be nonnegative");
  c.initial_params.tg_p = static_cast<int>(integer("tg_p", 1, 0, 4096));

  c.forcing = choice("forcing", "none", [](const std::string& s) {
    if (s == "none") return ForcingKind::None;
    if (s == "random") return ForcingKind::Random;
    if (s == "taylor-green") return ForcingKind::TaylorGreen;
    throw std::invalid_argument("unknown forcing '" + s + "' (none|random|taylor-green)");
  });
  c.forcing_amplitude = num("forcing_amplitude", 0.0);
  if (c.forcing_amplitude < 0.0) kv.fail("forcing_amplitude", "value must be nonnegative");
  c.forcing_planar = boolean("forcing_planar", false);
  c.modulation.kind = choice("forcing_modulation", "constant", modulation_kind_from_string);
  c.modulation.amplitude = 1.0;
  c.modulation.omega = num("forcing_omega", 0.0);
  c.modulation.phase = num("forcing_phase", 0.0);

  c.regime = choice("regime", "thm2", regime_from_string);
  c.slack_rel = positive("slack_rel", 1e-6);
  c.tail_fraction = positive("tail_fraction", 0.25);
  if (c.tail_fraction > 1.0) kv.fail("tail_fraction", "value must be in (0, 1]");
  c.trajectories = static_cast<int>(integer("trajectories", 5, 1, 10000));

  c.eps_list = kv.get_list("eps_list", {0.25, 0.125, 0.0625, 0.03125, 0.015625});
  {
    std::string s;
    for (double e : c.eps_list) {
      if (!(e > 0.0 && e < 1.0)) kv.fail("eps_list", "entries must lie in (0, 1)");
      s += (s.empty() ? "" : ",") + fmt(e);
    }
    eff["eps_list"] = s;
  }
  c.inequality = str("inequality", "lemma4-inf");
  try {
    lab_inequality_from_string(c.inequality);
  } catch (const std::invalid_argument& e) {
    kv.fail("inequality", std::string(e.what()) + " (lemma4-inf|lemma4-4|lemma6|poincare|hausdorff-young)");
  }
  c.budget = static_cast<int>(integer("budget", 400, 1, 100000000));
  c.resolution = positive("resolution", 2.0);
  c.sweep_l = positive("sweep_l", 1.5);
  c.sweep_n3 = static_cast<int>(integer("sweep_n3", 2, 1, 4096));
  c.alpha = positive("alpha", 1.0);
  c.hy_p = num("hy_p", 4.0);
  if (c.hy_p < 2.0) kv.fail("hy_p", "value must be >= 2");
  c.delta = positive("delta", 0.1);
  c.c = positive("c", 1.0);
  c.parallelism = static_cast<int>(integer("parallelism", 1, 1, 1024));

  std::filesystem::path def_root = "thinns-out";
  if (const char* env = std::getenv("THINNS_OUTPUT_ROOT"); env && *env) def_root = env;
  c.output_dir = str("output_dir", (def_root / to_string(c.scenario)).string());
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : effective) j[k] = v;
  return j;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [k, v] : effective) {
    // The output location does not change the experiment.
    if (k == "output_dir") continue;
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace thinns
