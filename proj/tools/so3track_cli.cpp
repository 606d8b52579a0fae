// so3track: closed-loop attitude tracking simulations on SO(3).
//
//   so3track simulate --config scenario.yaml [--out run.csv] [--record-every N]
//   so3track reproduce fig1|fig2|exp [--out-dir DIR]
//   so3track validate-gains --config scenario.yaml
//   so3track roa --config scenario.yaml
//
// Exit codes: 0 success, 1 configuration error, 2 numerical divergence.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "so3track/controllers.hpp"
#include "so3track/diagnostics.hpp"
#include "so3track/harness.hpp"

namespace {

using namespace so3track;

constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;

void write_run(const RunResult& run, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) {
    throw ConfigError("cannot write '" + csv_path + "'");
  }
  write_csv(out, run.records);
}

int simulate(const std::string& config, const std::string& out_path,
             int record_every) {
  Scenario s = load_scenario(config);
  if (record_every > 0) s.record_every = record_every;
  const RunResult run = run_scenario(s);
  if (out_path.empty()) {
    write_csv(std::cout, run.records);
  } else {
    write_run(run, out_path);
  }
  write_summary(out_path.empty() ? std::cerr : std::cout, run.summary);
  return 0;
}

int reproduce(const std::string& which, const std::string& out_dir) {
  std::vector<Scenario> scenarios;
  if (which == "fig1") {
    scenarios = {benchmark_scenario(ControllerMode::kAgts),
                 benchmark_scenario(ControllerMode::kGts)};
  } else if (which == "fig2") {
    scenarios = {benchmark_scenario(ControllerMode::kAdaptiveAgts),
                 benchmark_scenario(ControllerMode::kAdaptiveGts)};
  } else if (which == "exp") {
    scenarios = {inverted_equilibrium_scenario(ControllerMode::kAdaptiveAgts),
                 inverted_equilibrium_scenario(ControllerMode::kAdaptiveGts)};
  } else {
    throw ConfigError("unknown preset '" + which + "' (expected fig1, fig2 or exp)");
  }
  std::filesystem::create_directories(out_dir);

  // Scenarios share nothing; run one worker per scenario.
  std::vector<std::future<RunResult>> jobs;
  for (const Scenario& s : scenarios) {
    jobs.push_back(std::async(std::launch::async, [s] { return run_scenario(s); }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const RunResult run = jobs[i].get();
    const std::string path =
        (std::filesystem::path(out_dir) / (which + "_" + scenarios[i].name + ".csv"))
            .string();
    write_run(run, path);
    std::cout << "wrote " << path << '\n';
    write_summary(std::cout, run.summary);
    std::cout << '\n';
  }
  return 0;
}

int validate(const std::string& config) {
  const Scenario s = load_scenario(config);
  const GainReport report = validate_gains(s.gains, s.mode);
  std::cout.precision(17);
  std::cout << "controller: " << to_string(s.mode) << '\n'
            << "k_r: " << s.gains.k_r << '\n'
            << "k_omega: " << s.gains.k_omega << '\n'
            << "a: " << s.gains.a << '\n'
            << "mu: " << s.gains.mu << '\n'
            << "mu_bound: " << report.mu_bound << '\n'
            << "lambda_min(W3): " << report.w3_min_eigenvalue << '\n'
            << "sigma: " << report.sigma << '\n';
  if (report.adaptive_margin) {
    std::cout << "B: " << *report.adaptive_margin << '\n';
  }
  for (const auto& v : report.violations) {
    std::cout << "VIOLATED: " << v.condition << " (" << v.detail << ")\n";
  }
  std::cout << (report.ok() ? "all gain conditions hold\n" : "gain check failed\n");
  return report.ok() ? 0 : kExitConfig;
}

int roa(const std::string& config) {
  const Scenario s = load_scenario(config);
  const ReferenceSample ref0 = make_reference(s)(0.0);
  const RoaReport r = roa_membership(s.r0, s.omega0, ref0, s.gains, s.mode);
  std::cout.precision(17);
  std::cout << "controller: " << to_string(s.mode) << '\n'
            << "theta0: " << r.theta0 << '\n'
            << "|e_Omega(0)|: " << r.e_omega_norm << '\n'
            << "V0(0): " << r.v0 << '\n'
            << "threshold: " << r.threshold << '\n'
            << "nominal_bound: " << r.nominal_bound << '\n'
            << "shifted_bound: " << r.shifted_bound << '\n'
            << "active_bound: " << r.active_bound << '\n';
  if (r.theta_b0) std::cout << "theta_b0: " << *r.theta_b0 << '\n';
  if (r.gamma) std::cout << "gamma: " << *r.gamma << '\n';
  if (r.adaptive_margin) std::cout << "B: " << *r.adaptive_margin << '\n';
  std::cout << "in_R1: " << (r.in_nominal_set ? "yes" : "no") << '\n'
            << "in_R3: " << (r.in_shifted_set ? "yes" : "no") << '\n'
            << "in_R: " << (r.in_region ? "yes" : "no") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attitude tracking on SO(3) with shifted reference trajectories"};
  app.require_subcommand(1);

  std::string config;
  std::string out_path;
  int record_every = 0;
  auto* sim = app.add_subcommand("simulate", "run one scenario and emit CSV");
  sim->add_option("--config", config, "scenario file")->required();
  sim->add_option("--out", out_path, "CSV output path (stdout if omitted)");
  sim->add_option("--record-every", record_every, "record every N integrator steps");

  std::string preset;
  std::string out_dir = ".";
  auto* rep = app.add_subcommand("reproduce", "run a preset scenario set");
  rep->add_option("preset", preset, "fig1, fig2 or exp")->required();
  rep->add_option("--out-dir", out_dir, "directory for the CSV files");

  auto* val = app.add_subcommand("validate-gains", "check gain inequalities");
  val->add_option("--config", config, "scenario file")->required();

  auto* roa_cmd = app.add_subcommand("roa", "region-of-attraction membership");
  roa_cmd->add_option("--config", config, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (sim->parsed()) return simulate(config, out_path, record_every);
    if (rep->parsed()) return reproduce(preset, out_dir);
    if (val->parsed()) return validate(config);
    if (roa_cmd->parsed()) return roa(config);
  } catch (const NumericalDivergence& e) {
    std::cerr << "numerical divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
