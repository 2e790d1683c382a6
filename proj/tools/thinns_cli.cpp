// Command-line front end: one subcommand per scenario.

#include "thinns/run_config.hpp"
#include "thinns/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::string usage_keys() {
  std::string s = "config keys (key=value, one per line, '#' comments):\n ";
  int col = 1;
  for (const auto& k : thinns::config_keys()) {
    if (col + static_cast<int>(k.size()) > 76) {
      s += "\n ";
      col = 1;
    }
    s += " " + k;
    col += static_cast<int>(k.size()) + 1;
  }
  return s + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin-domain Navier-Stokes experiments"};
  app.footer(usage_keys() + "output root: $THINNS_OUTPUT_ROOT (default ./thinns-out)\n"
                            "exit codes: 0 ok, 1 failure, 2 invalid config or usage, 3 blow-up");
  app.require_subcommand(0, 1);

  std::string config_path, output;
  std::vector<std::string> overrides;
  bool use_defaults = false;
  const char* names[] = {"simulate", "sweep", "estimate-constants", "verify-inequalities", "rescale-check",
                         "thresholds"};
  for (const char* name : names) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " scenario");
    sub->add_option("-c,--config", config_path, "key=value config file");
    sub->add_option("-s,--set", overrides, "override, key=value (repeatable)");
    sub->add_option("-o,--output", output, "output directory");
    sub->add_flag("--defaults", use_defaults, "run with built-in defaults when no config is given");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : thinns::kExitInvalidConfig;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return thinns::kExitInvalidConfig;
  }
  const std::string scenario = app.get_subcommands().front()->get_name();

  try {
    thinns::KeyValueConfig kv;
    if (!config_path.empty()) kv = thinns::KeyValueConfig::load(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) throw thinns::ConfigError("--set " + o + ": expected key=value");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (!output.empty()) kv.set("output_dir", output);
    if (kv.empty() && !use_defaults) {
      std::cerr << "empty config\n\n" << app.get_subcommands().front()->help();
      return thinns::kExitInvalidConfig;
    }
    if (kv.has("scenario") && kv.get("scenario", "") != scenario)
      kv.fail("scenario", "config is for '" + kv.get("scenario", "") + "', not '" + scenario + "'");
    kv.set("scenario", scenario);
    const thinns::ExperimentConfig cfg = thinns::experiment_from_kv(kv);
    return thinns::run_scenario(cfg, std::cout);
  } catch (const thinns::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return thinns::kExitInvalidConfig;
  }
}
