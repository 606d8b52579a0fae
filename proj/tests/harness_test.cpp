#include "so3track/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace so3track {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(ParseScenarioTest, MinimalFileUsesDefaults) {
  const Scenario s = parse_scenario("controller: GTS\ntheta0: 1.0\n");
  EXPECT_EQ(s.mode, ControllerMode::kGts);
  EXPECT_EQ(s.reference, ReferenceKind::kBenchmark);
  EXPECT_EQ(s.gains.k_r, 9.0);
  EXPECT_EQ(s.gains.k_omega, 4.2);
  EXPECT_EQ(s.gains.a, 0.9);
  EXPECT_NEAR(s.gains.mu, 0.6406779661016948, 1e-15);
  EXPECT_EQ(s.t_final, 10.0);
  EXPECT_EQ(s.h, 1e-3);
  EXPECT_EQ(s.record_every, 10);
  EXPECT_NEAR(conjugacy_angle(s.r0), 1.0, 1e-12);
}

TEST(ParseScenarioTest, NestedGroupsAndAllKeys) {
  const Scenario s = parse_scenario(R"(
name: hover
controller: aGTS
inertia: [0.1, 0.2, 0.3]
reference: fixed-axis
reference_axis: [0, 0, 2]
reference_rate: 0.5
initial:
  theta0: 2.0
  axis: [1, 0, 0]
  omega0: [0.1, 0.2, 0.3]
disturbance: [0.1, 0, 0]
delta_max: 0.5
gains:
  k_r: 4
  k_omega: 3
  k_delta: 10
  epsilon: 0.8
t_final: 2
h: 0.002
record_every: 5
)");
  EXPECT_EQ(s.name, "hover");
  EXPECT_EQ(s.mode, ControllerMode::kAdaptiveGts);
  EXPECT_EQ(s.inertia_diagonal, Vector3(0.1, 0.2, 0.3));
  EXPECT_EQ(s.reference, ReferenceKind::kFixedAxis);
  EXPECT_EQ(s.reference_axis, Vector3::UnitZ());
  EXPECT_EQ(s.omega0, Vector3(0.1, 0.2, 0.3));
  EXPECT_EQ(s.gains.k_delta, 10.0);
  EXPECT_EQ(s.gains.delta_max, 0.5);
  EXPECT_EQ(s.gains.a, 0.8);
  EXPECT_EQ(s.record_every, 5);
  EXPECT_NO_THROW(validate_scenario(s));
}

TEST(ParseScenarioTest, ExplicitMatrixInitialAttitude) {
  const Scenario s =
      parse_scenario("controller: AGTS\nr0: [-1, 0, 0, 0, -1, 0, 0, 0, 1]\n");
  EXPECT_LT((s.r0.matrix() - rotation_z(kPi).matrix()).norm(), 1e-15);
}

TEST(ParseScenarioTest, Errors) {
  EXPECT_THROW(parse_scenario("theta0: 1\n"), ConfigError);                    // no controller
  EXPECT_THROW(parse_scenario("controller: PID\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\nk_rr: 3\n"), ConfigError);     // unknown key
  EXPECT_THROW(parse_scenario("controller: GTS\nk_r: fast\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\ninertia: [1, 2]\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\ninertia: 3\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\naxis: [0, 0, 0]\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\nreference: paper\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\nrecord_every: 2.5\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\nr0: [1, 0, 0, 0, 1, 0, 0, 0, 2]\n"),
               ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\nr0: [1, 0, 0, 0, 1, 0, 0, 0, 1]\ntheta0: 1\n"),
               ConfigError);
  EXPECT_THROW(parse_scenario("controller: GTS\ngains:\n  k_r: 1\nk_r: 2\n"), ConfigError);
  EXPECT_THROW(parse_scenario("controller: [GTS\n"), ConfigError);
  EXPECT_THROW(parse_scenario("- 1\n- 2\n"), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.yaml"), ConfigError);
}

TEST(ValidateScenarioTest, RejectsBadHorizonAndGains) {
  Scenario s = benchmark_scenario(ControllerMode::kAgts);
  EXPECT_NO_THROW(validate_scenario(s));
  s.h = 20.0;
  EXPECT_THROW(validate_scenario(s), ConfigError);
  s = benchmark_scenario(ControllerMode::kAgts);
  s.t_final = 0.0;
  EXPECT_THROW(validate_scenario(s), ConfigError);
  s = benchmark_scenario(ControllerMode::kAgts);
  s.gains.a = -0.1;
  try {
    validate_scenario(s);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("0 < a < 1"), std::string::npos) << e.what();
  }
  s = benchmark_scenario(ControllerMode::kAdaptiveGts);
  s.disturbance = Vector3(5, 0, 0);
  EXPECT_THROW(validate_scenario(s), ConfigError);
  s = benchmark_scenario(ControllerMode::kAgts);
  s.inertia_diagonal = Vector3(1, 0, 1);
  EXPECT_THROW(run_scenario(s), ConfigError);
}

TEST(RunScenarioTest, RecordsAndTimeGrid) {
  Scenario s = benchmark_scenario(ControllerMode::kAgts);
  s.t_final = 1.0;
  const RunResult run = run_scenario(s);
  ASSERT_EQ(run.records.size(), 101u);
  EXPECT_EQ(run.records.front().t, 0.0);
  EXPECT_EQ(run.records.back().t, 1.0);
  for (std::size_t k = 1; k < run.records.size(); ++k) {
    EXPECT_GT(run.records[k].t, run.records[k - 1].t);
  }
  EXPECT_EQ(run.summary.steps, 1000);
  // Non-multiple horizon: the last step lands exactly on t_final.
  s.t_final = 0.0105;
  const RunResult odd = run_scenario(s);
  EXPECT_EQ(odd.records.back().t, 0.0105);
  EXPECT_EQ(odd.summary.steps, 11);
}

TEST(RunScenarioTest, ZeroInitialErrorStaysOnReference) {
  for (auto mode : {ControllerMode::kAgts, ControllerMode::kGts, ControllerMode::kAdaptiveAgts,
                    ControllerMode::kAdaptiveGts}) {
    Scenario s = benchmark_scenario(mode);
    s.r0 = benchmark_reference(0.0).rd;
    s.omega0 = benchmark_reference(0.0).omega_d;
    s.disturbance = Vector3::Zero();
    s.t_final = 5.0;
    const RunResult run = run_scenario(s);
    EXPECT_EQ(run.summary.branch, Branch::kNominal);
    for (const auto& rec : run.records) {
      ASSERT_LE(rec.e_r_norm, 1e-9) << to_string(mode) << " t = " << rec.t;
      ASSERT_LE(rec.e_omega_norm, 1e-9) << to_string(mode) << " t = " << rec.t;
      ASSERT_LE(std::abs(rec.v), 1e-10);
    }
  }
}

TEST(RunScenarioTest, GtsBenchmarkConverges) {
  const RunResult run = run_scenario(benchmark_scenario(ControllerMode::kGts));
  const RunSummary& sum = run.summary;
  EXPECT_EQ(sum.branch, Branch::kShifted);
  EXPECT_NEAR(sum.initial_v0, 18.0, 0.01);
  EXPECT_NEAR(sum.branch_threshold, 16.2, 1e-12);
  EXPECT_NEAR(sum.theta0, 0.999 * kPi, 1e-9);
  ASSERT_TRUE(sum.theta_b0);
  EXPECT_NEAR(*sum.theta_b0, 0.8989120309389351, 1e-12);
  EXPECT_LT(sum.terminal_e_r, 1e-2);
  ASSERT_TRUE(sum.time_to_threshold);
  EXPECT_LT(*sum.time_to_threshold, 10.0);
  EXPECT_TRUE(run.records.front().theta_b);
  EXPECT_TRUE(run.records.front().e_r_tilde_norm);
  EXPECT_FALSE(run.records.front().delta_hat);
}

TEST(RunScenarioTest, AdaptiveGtsEstimatesDisturbance) {
  const RunResult run = run_scenario(benchmark_scenario(ControllerMode::kAdaptiveGts));
  ASSERT_TRUE(run.summary.terminal_estimate_error);
  EXPECT_LT(*run.summary.terminal_estimate_error, 0.05);
  EXPECT_LT(run.summary.terminal_e_r, 1e-2);
  ASSERT_TRUE(run.summary.adaptive_margin);
  EXPECT_NEAR(*run.summary.adaptive_margin, 10.31, 0.01);
}

// GTS leaves the near-pi error well before AGTS does. "Faster" compares
// the tail envelopes sup_{s >= t} ||E_R(s)||, since the AGTS error
// oscillates through zero once both runs have converged.
std::vector<double> tail_envelope(const RunResult& run) {
  std::vector<double> env(run.records.size());
  double worst = 0.0;
  for (std::size_t k = run.records.size(); k-- > 0;) {
    worst = std::max(worst, run.records[k].e_r_norm);
    env[k] = worst;
  }
  return env;
}

TEST(RunScenarioTest, ShiftedBranchIsFaster) {
  const RunResult agts = run_scenario(benchmark_scenario(ControllerMode::kAgts));
  const RunResult gts = run_scenario(benchmark_scenario(ControllerMode::kGts));
  ASSERT_EQ(agts.records.size(), gts.records.size());
  const double agts0 = agts.records.front().e_r_norm;
  const double gts0 = gts.records.front().e_r_norm;
  EXPECT_DOUBLE_EQ(agts0, gts0);
  for (const auto& rec : agts.records) {
    if (rec.t <= 3.0) EXPECT_GE(rec.e_r_norm, 0.99 * agts0) << "t = " << rec.t;
  }
  const std::vector<double> agts_env = tail_envelope(agts);
  const std::vector<double> gts_env = tail_envelope(gts);
  for (std::size_t k = 0; k < gts.records.size(); ++k) {
    const double t = gts.records[k].t;
    if (std::abs(t - 3.0) < 1e-9) EXPECT_LT(gts.records[k].e_r_norm, 0.5 * gts0);
    if (t >= 1.0) EXPECT_LT(gts_env[k], agts_env[k]) << "t = " << t;
  }
}

TEST(RunScenarioTest, InvertedEquilibriumPresetRuns) {
  for (auto mode : {ControllerMode::kAdaptiveAgts, ControllerMode::kAdaptiveGts}) {
    const Scenario s = inverted_equilibrium_scenario(mode);
    EXPECT_NEAR(conjugacy_angle(s.r0), kPi, 1e-12);
    const RunResult run = run_scenario(s);
    EXPECT_TRUE(std::isfinite(run.summary.terminal_e_r));
  }
}

TEST(RunScenarioTest, DivergenceIsReported) {
  Scenario s = benchmark_scenario(ControllerMode::kAgts);
  s.h = 1.0;  // k_omega h = 4.2 is outside the RK4 stability interval
  s.t_final = 200.0;
  try {
    run_scenario(s);
    FAIL() << "expected NumericalDivergence";
  } catch (const NumericalDivergence& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), 200.0);
  }
}

TEST(CsvTest, HeaderAndEmptyColumns) {
  Scenario s = benchmark_scenario(ControllerMode::kAgts);
  s.t_final = 0.01;
  std::ostringstream out;
  write_csv(out, run_scenario(s).records);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "t,eR_norm,eOmega_norm,eR_tilde_norm,eOmega_tilde_norm,tau_x,tau_y,tau_z,"
            "dhat_x,dhat_y,dhat_z,V0,V,Vbar,theta_b");
  std::getline(in, line);
  EXPECT_EQ(std::count(line.begin(), line.end(), ','), 14);
  EXPECT_NE(line.find(",,,,"), std::string::npos);  // dhat columns blank for AGTS
  EXPECT_EQ(line.back(), ',');                      // theta_b blank
}

TEST(CsvTest, BitIdenticalAcrossRuns) {
  Scenario s = benchmark_scenario(ControllerMode::kAdaptiveGts);
  s.t_final = 1.0;
  std::ostringstream a;
  std::ostringstream b;
  write_csv(a, run_scenario(s).records);
  write_csv(b, run_scenario(s).records);
  EXPECT_EQ(a.str(), b.str());
}

TEST(SummaryTest, ListsKeyFields) {
  Scenario s = benchmark_scenario(ControllerMode::kGts);
  s.t_final = 0.1;
  std::ostringstream out;
  write_summary(out, run_scenario(s).summary);
  const std::string text = out.str();
  for (const char* key : {"branch: shifted", "theta0: ", "theta_b0: ", "gamma: ", "sigma: ",
                          "B: n/a", "V0(0): ", "terminal_eR_norm: "}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace so3track
