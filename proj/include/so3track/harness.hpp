#pragma once

/**
 * @file harness.hpp
 * Closed-loop scenario runner and its file formats.
 *
 * Scenario files are flat YAML mappings (nested mappings are flattened, so
 * gains or the initial state may be grouped). CSV output has a fixed header
 * and prints every number with 17 significant digits.
 */

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "so3track/controllers.hpp"
#include "so3track/dynamics.hpp"
#include "so3track/gains.hpp"

namespace so3track {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalDivergence : public std::runtime_error {
 public:
  NumericalDivergence(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

enum class ReferenceKind { kBenchmark, kConstant, kFixedAxis };

struct Scenario {
  std::string name = "scenario";
  ControllerMode mode = ControllerMode::kAgts;
  Vector3 inertia_diagonal{3.0, 2.0, 1.0};

  ReferenceKind reference = ReferenceKind::kBenchmark;
  Rotation reference_attitude;  // target (constant) or start (fixed-axis)
  Vector3 reference_axis = Vector3::UnitZ();
  double reference_rate = 0.0;

  Rotation r0;  // initial attitude
  Vector3 omega0 = Vector3::Zero();

  Vector3 disturbance = Vector3::Zero();
  double delta_max = 0.0;

  GainSet gains = GainSet::recipe(9.0, 4.2, 0.9);

  double t_final = 10.0;
  double h = 1e-3;
  int record_every = 10;
};

/// Throws ConfigError when the horizon, step, disturbance or gains are invalid.
void validate_scenario(const Scenario& s);

ReferenceProvider make_reference(const Scenario& s);

/// R(0) = R_d(0) exp(theta0 hat(axis)) for the scenario's reference.
Rotation initial_attitude_about(const Scenario& s, double theta0,
                                const Vector3& axis);

/// One output row. Optional fields are written as empty CSV cells.
struct TrajectoryRecord {
  double t = 0.0;
  double e_r_norm = 0.0;      // ||R - R_d||
  double e_omega_norm = 0.0;  // ||Omega - Omega_d||
  std::optional<double> e_r_tilde_norm;
  std::optional<double> e_omega_tilde_norm;
  Vector3 tau = Vector3::Zero();
  std::optional<Vector3> delta_hat;
  double v0 = 0.0;  // Lyapunov values are taken w.r.t. the tracked reference
  double v = 0.0;
  std::optional<double> v_bar;
  std::optional<double> theta_b;
};

struct RunSummary {
  std::string name;
  ControllerMode mode = ControllerMode::kAgts;
  Branch branch = Branch::kNominal;
  double theta0 = 0.0;
  std::optional<double> theta_b0;
  std::optional<double> gamma;
  double sigma = 0.0;
  std::optional<double> adaptive_margin;
  double initial_v0 = 0.0;
  double branch_threshold = 0.0;
  double terminal_e_r = 0.0;
  double terminal_e_omega = 0.0;
  std::optional<double> terminal_estimate_error;
  std::optional<double> time_to_threshold;  // ||E_R|| < 0.01 from then on
  double max_torque_jump = 0.0;             // max step-to-step |tau| change
  long steps = 0;
};

struct RunResult {
  std::vector<TrajectoryRecord> records;
  RunSummary summary;
};

/**
 * Simulates the closed loop over [0, t_final]. Throws ConfigError for
 * invalid scenarios and NumericalDivergence when the state becomes
 * non-finite or unbounded.
 */
RunResult run_scenario(const Scenario& s);

inline constexpr std::string_view kCsvHeader =
    "t,eR_norm,eOmega_norm,eR_tilde_norm,eOmega_tilde_norm,tau_x,tau_y,tau_z,"
    "dhat_x,dhat_y,dhat_z,V0,V,Vbar,theta_b";

void write_csv(std::ostream& out, std::span<const TrajectoryRecord> records);
void write_summary(std::ostream& out, const RunSummary& summary);

/// Parses a YAML scenario; throws ConfigError on syntax, unknown keys or
/// invalid values.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Benchmark tracking problem: I = diag(3, 2, 1), theta0 = 0.999 pi about
/// e2, Omega(0) = (2, 0, 1), k_r = 9, k_omega = 4.2, epsilon = 0.9. Adaptive
/// modes add Delta = (1, -2, 0.5), delta_max = 3, k_delta = 25.
Scenario benchmark_scenario(ControllerMode mode);

/// Stabilization of a fixed attitude from a near-pi initial error with the
/// low-gain tuning of the inverted-pendulum experiment. Inertia and
/// disturbance are placeholders; qualitative only.
Scenario inverted_equilibrium_scenario(ControllerMode mode);

}  // namespace so3track
