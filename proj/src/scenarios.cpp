#include "thinns/scenarios.hpp"

#include "thinns/checkpoint.hpp"
#include "thinns/diagnostics.hpp"
#include "thinns/gronwall.hpp"
#include "thinns/inequality_lab.hpp"
#include "thinns/initial.hpp"
#include "thinns/operators.hpp"
#include "thinns/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

namespace thinns {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Artifacts written by one scenario, listed in the manifest.
struct Artifacts {
  fs::path root;
  std::vector<std::string> files;
  std::mutex mu;

  fs::path add(const fs::path& rel) {
    std::lock_guard<std::mutex> lock(mu);
    files.push_back(rel.generic_string());
    return root / rel;
  }
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Artifacts leave out the output location so reruns elsewhere compare equal.
json with_config(json j, const ExperimentConfig& cfg) {
  j["config"] = cfg.to_json();
  j["config"].erase("output_dir");
  j["config_hash"] = cfg.hash();
  return j;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string eps_dirname(std::size_t i, double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "eps_%02zu_%.6g", i, eps);
  return buf;
}

LabOptions lab_options(const ExperimentConfig& cfg, int threads) {
  LabOptions o;
  o.budget = cfg.budget;
  o.seed = cfg.seed;
  o.alpha = cfg.alpha;
  o.hy_p = cfg.hy_p;
  o.threads = threads;
  return o;
}

void write_estimate(Artifacts& art, const fs::path& dir, const ConstantEstimate& est, const ExperimentConfig& cfg,
                    bool header_csv) {
  const fs::path ckpt = art.add(dir / "maximizer.bin");
  write_checkpoint(ckpt, Checkpoint{est.maximizer, 0.0, 0, {{"inequality", to_string(est.inequality)}}});
  json j = est.to_json();
  j["maximizer_checkpoint"] = (dir / "maximizer.bin").generic_string();
  write_json(art.add(dir / "estimate.json"), with_config(j, cfg));
  if (header_csv) {
    std::ofstream csv(art.add(dir / "estimates.csv"));
    csv << "eps,resolution,max_ratio,normalized_ratio\n";
    char line[160];
    std::snprintf(line, sizeof line, "%.17g,%d,%.17g,%.17g\n", est.domain.eps, est.domain.n1, est.max_ratio,
                  est.normalized_ratio);
    csv << line;
  }
}

SpectralField scaled_to_l2(SpectralField f, double target) {
  const double n = norm_l2(f);
  if (n == 0.0) return f;
  return (target / n) * std::move(f);
}

// simulate ---------------------------------------------------------------

struct TrajectoryOutcome {
  RunResult result;
  double U = 0.0, F = 0.0;
};

TrajectoryOutcome simulate_one(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir,
                               Artifacts& art, const fs::path& rel) {
  InitialParams ip = cfg.initial_params;
  ip.seed = seed;
  std::mt19937_64 rng(seed ^ 0xF0F0F0F0F0F0F0F0ULL);
  const SpectralField u0 = make_initial(cfg.domain, cfg.initial, ip);
  const ForcingSpec f = make_forcing(cfg, cfg.domain, rng);
  SolverConfig sc = cfg.solver;
  if (sc.checkpoint_stride > 0) {
    sc.checkpoint_dir = dir / "checkpoints";
    fs::create_directories(sc.checkpoint_dir);
  }
  TrajectoryOutcome out;
  out.result = run(u0, f, sc);
  out.U = norm_h1(u0);
  out.F = f.bound();
  for (const auto& p : out.result.checkpoints) art.add(rel / "checkpoints" / p.filename());
  write_series_csv(art.add(rel / "diagnostics.csv"), out.result.series);
  write_split_csv(art.add(rel / "diagnostics_split.csv"), out.result.series);
  return out;
}

json run_summary(const ExperimentConfig& cfg, const TrajectoryOutcome& t) {
  const RunResult& r = t.result;
  BoundsInput bi;
  bi.U = t.U;
  bi.F = t.F;
  bi.l1 = cfg.domain.l1;
  bi.l2 = cfg.domain.l2;
  bi.nu = cfg.domain.nu;
  bi.eps = cfg.domain.eps;
  bi.tail_fraction = cfg.tail_fraction;
  bi.blew_up = r.blow_up.has_value();
  double chi_max = 0.0;
  for (const auto& s : r.series.samples) chi_max = std::max(chi_max, s.chi());
  json j;
  j["domain"] = domain_to_json(cfg.domain);
  j["scheme"] = to_string(cfg.solver.scheme);
  j["steps"] = r.final_state.step;
  j["final_time"] = r.final_state.t;
  j["samples"] = r.series.size();
  j["U"] = t.U;
  j["F"] = t.F;
  j["max_divergence"] = r.max_divergence;
  j["reprojections"] = r.reprojections;
  j["chi_max"] = chi_max;
  j["h2_squared_integral"] = finite_or_null(h2_squared_integral(r.series));
  j["theorem_bounds"] = evaluate_theorem_bounds(r.series, bi).to_json();
  j["blow_up"] = r.blow_up ? json{{"t", r.blow_up->t}, {"step", r.blow_up->step}, {"reason", r.blow_up->reason}}
                           : json(nullptr);
  j["io_error"] = r.io_error ? json(*r.io_error) : json(nullptr);
  return j;
}

void forensic_dump(Artifacts& art, const fs::path& rel, const ExperimentConfig& cfg, const RunResult& r) {
  const BlowUpReport& b = *r.blow_up;
  write_checkpoint(art.add(rel / "blowup_state.bin"),
                   Checkpoint{r.final_state.u, r.final_state.t, r.final_state.step, {{"blow_up", b.reason}}});
  json j{{"t", b.t},   {"step", b.step}, {"reason", b.reason},
         {"l2", b.l2}, {"h1", b.h1},     {"max_coeff", b.max_coeff},
         {"last_finite_state", (rel / "blowup_state.bin").generic_string()}};
  write_json(art.add(rel / "blowup.json"), with_config(j, cfg));
}

int simulate(const ExperimentConfig& cfg, Artifacts& art, std::ostream& log) {
  const TrajectoryOutcome t = simulate_one(cfg, cfg.seed, art.root, art, "");
  write_json(art.add("run.json"), with_config(run_summary(cfg, t), cfg));
  if (t.result.blow_up) {
    forensic_dump(art, "", cfg, t.result);
    log << "blow-up: " << t.result.blow_up->reason << " at t=" << t.result.blow_up->t << '\n';
    return kExitBlowUp;
  }
  if (t.result.io_error) {
    log << "error: " << *t.result.io_error << '\n';
    return kExitFailure;
  }
  log << "simulate: " << t.result.final_state.step << " steps to t=" << t.result.final_state.t << ", "
      << t.result.series.size() << " samples\n";
  return kExitOk;
}

// verify-inequalities ------------------------------------------------------

int verify(const ExperimentConfig& cfg, Artifacts& art, std::ostream& log) {
  const int n = cfg.trajectories;
  std::vector<TrajectoryOutcome> runs(n);
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%02d", i);
    fs::create_directories(art.root / name);
    runs[i] = simulate_one(cfg, cfg.seed + static_cast<std::uint64_t>(i), art.root / name, art, name);
    write_json(art.add(fs::path(name) / "run.json"), with_config(run_summary(cfg, runs[i]), cfg));
    if (runs[i].result.blow_up) {
      forensic_dump(art, name, cfg, runs[i].result);
      log << "blow-up in " << name << ": " << runs[i].result.blow_up->reason << '\n';
      return kExitBlowUp;
    }
  }

  std::vector<DiagnosticSeries> series;
  double U = 0.0, F = 0.0;
  for (const auto& r : runs) {
    series.push_back(r.result.series);
    const auto& s0 = r.result.series.samples.front();
    U = std::max({U, s0.phi(cfg.regime), s0.psi(cfg.regime)});
    F = std::max(F, r.F);
  }
  InequalityOptions io;
  io.slack_rel = cfg.slack_rel;
  io.trajectory_id = "joint";
  const auto reports = check_diff_inequalities(series, cfg.domain.eps, cfg.regime, io);
  write_residual_trace_csv(art.add("residuals.csv"), reports);

  // Each trajectory also gets its own constants.
  json per = json::array();
  for (int i = 0; i < n; ++i) {
    InequalityOptions one = io;
    char name[32];
    std::snprintf(name, sizeof name, "traj_%02d", i);
    one.trajectory_id = name;
    json rows = json::array();
    for (const auto& r : check_diff_inequalities({series[i]}, cfg.domain.eps, cfg.regime, one))
      rows.push_back(r.to_json());
    per.push_back({{"trajectory", name}, {"reports", rows}});
  }

  const InequalitySystem sys = system_from_reports(reports, U, F, cfg.domain.eps, cfg.regime);
  const GronwallEnvelope env = solve_envelope(sys, cfg.solver.t_end);
  env.write_csv(art.add("envelope.csv"));

  bool all_pass = true;
  json rj = json::array();
  for (const auto& r : reports) {
    all_pass = all_pass && r.pass;
    rj.push_back(r.to_json());
  }
  bool all_contained = true;
  json cj = json::array();
  for (const auto& r : runs) {
    const ContainmentReport c = check_trajectory(r.result.series, sys, 1e-6);
    all_contained = all_contained && c.contained;
    cj.push_back(c.to_json());
  }
  const DerivedConstants& dc = env.derived;
  json j;
  j["regime"] = to_string(cfg.regime);
  j["reports"] = rj;
  j["per_trajectory"] = per;
  j["system"] = sys.to_json();
  j["derived"] = {{"c11", dc.c11}, {"c12", dc.c12}, {"c13", dc.c13}, {"c14", dc.c14}, {"c15", dc.c15},
                  {"c16", dc.c16}, {"c17", dc.c17}, {"b", dc.b},     {"K", dc.K}};
  j["psi_bound"] = finite_or_null(env.psi_bound);
  j["psi_limsup_bound"] = finite_or_null(env.psi_limsup_bound);
  j["containment"] = cj;
  j["verdict"] = {{"inequalities_pass", all_pass}, {"contained", all_contained}};
  write_json(art.add("inequalities.json"), with_config(j, cfg));
  log << "verify-inequalities: " << reports.size() << " rows " << (all_pass ? "pass" : "FAIL") << ", envelope "
      << (all_contained ? "contains" : "does NOT contain") << " all " << n << " trajectories\n";
  return kExitOk;
}

// inequality lab -----------------------------------------------------------

int estimate(const ExperimentConfig& cfg, Artifacts& art, std::ostream& log) {
  const LabInequality k = lab_inequality_from_string(cfg.inequality);
  const ConstantEstimate est = estimate_constant(k, cfg.domain, lab_options(cfg, cfg.parallelism));
  write_estimate(art, "", est, cfg, true);
  log << "estimate-constants: " << cfg.inequality << " max ratio " << est.max_ratio << " after " << est.evaluations
      << " evaluations\n";
  return kExitOk;
}

int sweep(const ExperimentConfig& cfg, Artifacts& art, std::ostream& log) {
  const LabInequality k = lab_inequality_from_string(cfg.inequality);
  const std::size_t m = cfg.eps_list.size();
  std::vector<ConstantEstimate> ests(m);
  std::vector<std::string> errors(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < m; i = next++) {
      try {
        const DomainSpec d =
            sweep_domain(cfg.sweep_l, cfg.eps_list[i], cfg.resolution, k == LabInequality::Lemma6 ? 0 : cfg.sweep_n3);
        ests[i] = estimate_constant(k, d, lab_options(cfg, 1));
        const fs::path dir = eps_dirname(i, cfg.eps_list[i]);
        fs::create_directories(art.root / dir);
        write_estimate(art, dir, ests[i], cfg, false);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(cfg.parallelism, static_cast<int>(m)));
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < m; ++i)
    if (!errors[i].empty()) throw std::invalid_argument("eps=" + std::to_string(cfg.eps_list[i]) + ": " + errors[i]);
  // Threads finish in any order; the manifest lists files sorted.
  std::sort(art.files.begin(), art.files.end());

  std::ofstream csv(art.add("scaling.csv"));
  csv << "eps,resolution,max_ratio,normalized_ratio\n";
  std::vector<double> eps, ratios;
  for (const auto& e : ests) {
    char line[160];
    std::snprintf(line, sizeof line, "%.17g,%d,%.17g,%.17g\n", e.domain.eps, e.domain.n1, e.max_ratio,
                  e.normalized_ratio);
    csv << line;
    eps.push_back(e.domain.eps);
    ratios.push_back(e.max_ratio);
  }
  json j;
  j["inequality"] = cfg.inequality;
  j["predicted_slope"] = eps_power(k);
  if (m >= 3) {
    const ScalingFit fit = fit_eps_scaling(eps, ratios);
    j["fit"] = fit.to_json();
    log << "sweep: " << cfg.inequality << " slope " << fit.slope << " +- " << fit.slope_stderr << " (predicted "
        << eps_power(k) << ")\n";
  } else {
    j["fit"] = nullptr;
    log << "sweep: fewer than 3 eps values, no slope fitted\n";
  }
  write_json(art.add("scaling_fit.json"), with_config(j, cfg));
  return kExitOk;
}

// rescale-check / thresholds -----------------------------------------------

int rescale_check(const ExperimentConfig& cfg, Artifacts& art, std::ostream& log) {
  std::mt19937_64 rng(cfg.seed);
  const SpectralField u =
      scaled_to_l2(random_divfree(cfg.domain, rng, cfg.initial_params.slope, cfg.initial_params.kmax, false),
                   cfg.initial_params.amplitude);
  const SpectralField f = scaled_to_l2(random_divfree(cfg.domain, rng, cfg.initial_params.slope,
                                                      cfg.initial_params.kmax, false),
                                       cfg.forcing_amplitude > 0.0 ? cfg.forcing_amplitude : 1.0);
  const RescaleIdentityCheck chk = check_rescale_identities(u, f);
  const Rescaled r = rescale(u, f);
  json j = chk.to_json();
  j["rescaled_domain"] = domain_to_json(r.domain);
  j["n"] = r.n;
  j["time_factor"] = r.time_factor;
  write_json(art.add("rescale.json"), with_config(j, cfg));
  log << "rescale-check: f err " << chk.f_rel_err << ", Du err " << chk.du_rel_err << ", inverse err "
      << chk.inverse_err << '\n';
  return kExitOk;
}

int thresholds(const ExperimentConfig& cfg, Artifacts& art, std::ostream& log) {
  ThresholdInput in;
  in.eps = cfg.domain.eps;
  in.power_log_delta.fill(cfg.delta);
  in.alpha_power_delta = cfg.delta;
  in.exp_delta = cfg.delta;
  in.c = cfg.c;
  const auto rows = literature_thresholds(in);
  write_thresholds_csv(art.add("thresholds.csv"), rows, in.eps, true);
  json j = json::array();
  for (const auto& r : rows)
    j.push_back({{"source", r.source}, {"quantity", r.quantity}, {"formula", r.formula}, {"value", r.value}});
  write_json(art.add("thresholds.json"), with_config({{"eps", in.eps}, {"rows", j}}, cfg));
  log << "thresholds: " << rows.size() << " rows at eps=" << in.eps << '\n';
  return kExitOk;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ForcingSpec make_forcing(const ExperimentConfig& cfg, const DomainSpec& domain, std::mt19937_64& rng) {
  if (cfg.forcing == ForcingKind::None || cfg.forcing_amplitude == 0.0) return ForcingSpec::none(domain);
  SpectralField profile;
  if (cfg.forcing == ForcingKind::Random) {
    profile = random_divfree(domain, rng, cfg.initial_params.slope, cfg.initial_params.kmax, cfg.forcing_planar);
  } else {
    InitialParams ip;
    ip.tg_p = cfg.forcing_planar ? 0 : cfg.initial_params.tg_p;
    profile = make_initial(domain, InitialKind::TaylorGreenLike, ip);
  }
  return ForcingSpec(scaled_to_l2(std::move(profile), cfg.forcing_amplitude), cfg.modulation);
}

int run_scenario(const ExperimentConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_timestamp();
  Artifacts art;
  art.root = cfg.output_dir;
  int code = kExitOk;
  std::string error;
  try {
    fs::create_directories(art.root);
    switch (cfg.scenario) {
      case Scenario::Simulate: code = simulate(cfg, art, log); break;
      case Scenario::Sweep: code = sweep(cfg, art, log); break;
      case Scenario::EstimateConstants: code = estimate(cfg, art, log); break;
      case Scenario::VerifyInequalities: code = verify(cfg, art, log); break;
      case Scenario::RescaleCheck: code = rescale_check(cfg, art, log); break;
      case Scenario::Thresholds: code = thresholds(cfg, art, log); break;
    }
  } catch (const std::invalid_argument& e) {
    error = e.what();
    code = kExitInvalidConfig;
  } catch (const std::exception& e) {
    error = e.what();
    code = kExitFailure;
  }
  if (!error.empty()) log << "error: " << error << '\n';
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json man;
  man["scenario"] = to_string(cfg.scenario);
  man["version"] = kVersion;
  man["config_hash"] = cfg.hash();
  man["config"] = cfg.to_json();
  man["started_utc"] = started;
  man["wall_time_s"] = wall;
  man["exit_code"] = code;
  man["error"] = error.empty() ? json(nullptr) : json(error);
  man["artifacts"] = art.files;
  try {
    write_json(art.root / "manifest.json", man);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    if (code == kExitOk) code = kExitFailure;
  }
  return code;
}

}  // namespace thinns
