#include "so3track/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "so3track/diagnostics.hpp"

namespace so3track {

namespace {

constexpr double kSettleThreshold = 1e-2;
constexpr double kDivergenceLimit = 1e6;

}  // namespace

void validate_scenario(const Scenario& s) {
  if (!(s.t_final > 0.0) || !std::isfinite(s.t_final)) {
    throw ConfigError("t_final must be positive");
  }
  if (!(s.h > 0.0) || !(s.h <= s.t_final)) {
    throw ConfigError("h must satisfy 0 < h <= t_final");
  }
  if (s.record_every < 1) {
    throw ConfigError("record_every must be at least 1");
  }
  if (!s.disturbance.allFinite() || !(s.delta_max >= 0.0) ||
      s.disturbance.norm() > s.delta_max) {
    std::ostringstream msg;
    msg << "disturbance norm " << s.disturbance.norm()
        << " exceeds delta_max = " << s.delta_max;
    throw ConfigError(msg.str());
  }
  if (std::abs(s.gains.delta_max - s.delta_max) > 0.0) {
    throw ConfigError("gains.delta_max must equal the scenario delta_max");
  }
  const GainReport report = validate_gains(s.gains, s.mode);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "gain check failed for " << to_string(s.mode) << ":";
    for (const auto& v : report.violations) {
      msg << " [" << v.condition << "; " << v.detail << "]";
    }
    throw ConfigError(msg.str());
  }
}

ReferenceProvider make_reference(const Scenario& s) {
  switch (s.reference) {
    case ReferenceKind::kBenchmark:
      return benchmark_reference;
    case ReferenceKind::kConstant:
      return constant_reference(s.reference_attitude);
    case ReferenceKind::kFixedAxis:
      return fixed_axis_reference(s.reference_attitude, s.reference_axis,
                                  s.reference_rate);
  }
  throw ConfigError("unknown reference kind");
}

Rotation initial_attitude_about(const Scenario& s, double theta0,
                                const Vector3& axis) {
  return make_reference(s)(0.0).rd * exp_rodrigues(theta0, axis);
}

namespace {

TrajectoryRecord make_record(double t, const AugmentedState& state,
                             const TrackingController& controller,
                             const Scenario& s) {
  const Matrix3& r = state.body.r.matrix();
  const Vector3& omega = state.body.omega;
  const ReferenceSample base = controller.base_reference(t);
  const ReferenceSample tracked = controller.reference(t);
  check_reference_bounds(base);

  TrajectoryRecord rec;
  rec.t = t;
  rec.e_r_norm = (r - base.rd.matrix()).norm();
  rec.e_omega_norm = (omega - base.omega_d).norm();
  if (const auto& shifted = controller.shifted()) {
    rec.e_r_tilde_norm = (r - tracked.rd.matrix()).norm();
    rec.e_omega_tilde_norm = (omega - tracked.omega_d).norm();
    rec.theta_b = shifted->theta_b(t);
  }
  rec.tau = controller.control(t, r, omega, state.estimate).torque;
  rec.v0 = eval_v0(r, omega, tracked, s.gains);
  rec.v = eval_v(r, omega, tracked, s.gains);
  if (is_adaptive(s.mode)) {
    rec.delta_hat = state.estimate;
    rec.v_bar = eval_v_bar(r, omega, tracked, s.gains, state.estimate, s.disturbance);
  }
  return rec;
}

void check_finite(const AugmentedState& state, double t) {
  const bool finite = state.body.omega.allFinite() && state.estimate.allFinite();
  if (!finite || state.body.omega.norm() > kDivergenceLimit ||
      state.estimate.norm() > kDivergenceLimit) {
    std::ostringstream msg;
    msg << "state diverged at t = " << t;
    throw NumericalDivergence(msg.str(), t);
  }
}

}  // namespace

RunResult run_scenario(const Scenario& s) {
  validate_scenario(s);

  std::optional<InertiaMatrix> inertia;
  try {
    inertia = InertiaMatrix::diagonal(s.inertia_diagonal.x(), s.inertia_diagonal.y(),
                                      s.inertia_diagonal.z());
  } catch (const SingularInertia& e) {
    throw ConfigError(e.what());
  }
  const Disturbance dist(s.disturbance, s.delta_max);
  const ReferenceProvider base = make_reference(s);
  const RigidBodyState initial{s.r0, s.omega0};

  std::optional<TrackingController> built;
  try {
    built.emplace(s.mode, s.gains, *inertia, base, initial);
  } catch (const InvalidGains& e) {
    throw ConfigError(e.what());
  } catch (const InvariantViolation& e) {
    throw ConfigError(e.what());
  }
  const TrackingController& controller = *built;

  const ControlLaw law = [&controller](double t, const Matrix3& r,
                                       const Vector3& omega,
                                       const Vector3& estimate) {
    return controller.control(t, r, omega, estimate);
  };

  RunResult result;
  RunSummary& sum = result.summary;
  sum.name = s.name;
  sum.mode = s.mode;
  sum.branch = controller.branch();
  sum.theta0 = conjugacy_angle(s.r0 * base(0.0).rd.transpose());
  if (const auto& shifted = controller.shifted()) {
    sum.theta_b0 = shifted->theta_b0();
    sum.gamma = shifted->gamma();
  }
  sum.sigma = stability_matrices(s.gains).sigma;
  if (is_adaptive(s.mode)) {
    sum.adaptive_margin = adaptive_margin(s.gains);
  }
  sum.initial_v0 = controller.initial_v0();
  sum.branch_threshold = controller.branch_threshold();

  const long steps = static_cast<long>(std::ceil(s.t_final / s.h - 1e-9));
  sum.steps = steps;

  AugmentedState state{initial, Vector3::Zero()};
  double t = 0.0;
  Vector3 last_tau = controller.control(t, state.body.r.matrix(), state.body.omega,
                                        state.estimate)
                         .torque;
  try {
    result.records.push_back(make_record(t, state, controller, s));
    for (long k = 1; k <= steps; ++k) {
      const double t_next = k == steps ? s.t_final : static_cast<double>(k) * s.h;
      state = integrate_step(state, law, dist, *inertia, t, t_next - t);
      t = t_next;
      check_finite(state, t);

      const Vector3 tau =
          controller.control(t, state.body.r.matrix(), state.body.omega, state.estimate)
              .torque;
      sum.max_torque_jump = std::max(sum.max_torque_jump, (tau - last_tau).norm());
      last_tau = tau;

      if (k % s.record_every == 0 || k == steps) {
        result.records.push_back(make_record(t, state, controller, s));
      }
    }
  } catch (const InvalidReference& e) {
    throw ConfigError(e.what());
  } catch (const So3Error& e) {
    // Reprojection fails only once the attitude update has blown up.
    throw NumericalDivergence(e.what(), t);
  }

  const TrajectoryRecord& last = result.records.back();
  sum.terminal_e_r = last.e_r_norm;
  sum.terminal_e_omega = last.e_omega_norm;
  if (last.delta_hat) {
    sum.terminal_estimate_error = (*last.delta_hat - s.disturbance).norm();
  }
  std::optional<std::size_t> last_above;
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    if (result.records[k].e_r_norm >= kSettleThreshold) last_above = k;
  }
  if (!last_above) {
    sum.time_to_threshold = result.records.front().t;
  } else if (*last_above + 1 < result.records.size()) {
    sum.time_to_threshold = result.records[*last_above + 1].t;
  }
  return result;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

void put(std::ostream& out, const std::optional<double>& v) {
  if (v) put(out, *v);
}

}  // namespace

void write_csv(std::ostream& out, std::span<const TrajectoryRecord> records) {
  out << kCsvHeader << '\n';
  for (const TrajectoryRecord& r : records) {
    put(out, r.t);
    out << ',';
    put(out, r.e_r_norm);
    out << ',';
    put(out, r.e_omega_norm);
    out << ',';
    put(out, r.e_r_tilde_norm);
    out << ',';
    put(out, r.e_omega_tilde_norm);
    for (int i = 0; i < 3; ++i) {
      out << ',';
      put(out, r.tau(i));
    }
    for (int i = 0; i < 3; ++i) {
      out << ',';
      if (r.delta_hat) put(out, (*r.delta_hat)(i));
    }
    out << ',';
    put(out, r.v0);
    out << ',';
    put(out, r.v);
    out << ',';
    put(out, r.v_bar);
    out << ',';
    put(out, r.theta_b);
    out << '\n';
  }
}

void write_summary(std::ostream& out, const RunSummary& s) {
  const auto line = [&out](std::string_view key, const auto& value) {
    out << key << ": ";
    if constexpr (std::is_same_v<std::decay_t<decltype(value)>, std::optional<double>>) {
      if (value) {
        put(out, *value);
      } else {
        out << "n/a";
      }
    } else if constexpr (std::is_arithmetic_v<std::decay_t<decltype(value)>>) {
      put(out, static_cast<double>(value));
    } else {
      out << value;
    }
    out << '\n';
  };
  line("scenario", s.name);
  line("controller", to_string(s.mode));
  line("branch", to_string(s.branch));
  line("theta0", s.theta0);
  line("theta_b0", s.theta_b0);
  line("gamma", s.gamma);
  line("sigma", s.sigma);
  line("B", s.adaptive_margin);
  line("V0(0)", s.initial_v0);
  line("branch_threshold", s.branch_threshold);
  line("terminal_eR_norm", s.terminal_e_r);
  line("terminal_eOmega_norm", s.terminal_e_omega);
  line("terminal_estimate_error", s.terminal_estimate_error);
  line("time_to_eR_below_0.01", s.time_to_threshold);
  line("max_torque_jump", s.max_torque_jump);
  line("steps", s.steps);
}

Scenario benchmark_scenario(ControllerMode mode) {
  Scenario s;
  s.name = std::string(to_string(mode));
  s.mode = mode;
  s.inertia_diagonal = {3.0, 2.0, 1.0};
  s.reference = ReferenceKind::kBenchmark;
  s.r0 = initial_attitude_about(s, 0.999 * std::numbers::pi, Vector3::UnitY());
  s.omega0 = {2.0, 0.0, 1.0};
  if (is_adaptive(mode)) {
    s.disturbance = {1.0, -2.0, 0.5};
    s.delta_max = 3.0;
    s.gains = GainSet::recipe(9.0, 4.2, 0.9, 25.0, 3.0);
    s.t_final = 30.0;
  } else {
    s.gains = GainSet::recipe(9.0, 4.2, 0.9);
    s.t_final = 10.0;
  }
  return s;
}

Scenario inverted_equilibrium_scenario(ControllerMode mode) {
  Scenario s;
  s.name = std::string(to_string(mode)) + "_inverted";
  s.mode = mode;
  s.inertia_diagonal = {0.08, 0.08, 0.14};
  s.reference = ReferenceKind::kConstant;
  s.reference_attitude = Rotation::identity();
  // Yawed by pi and pitched to the 45 degree joint limit.
  s.r0 = rotation_z(std::numbers::pi) *
         exp_rodrigues(std::numbers::pi / 4.0, Vector3::UnitY());
  s.omega0 = Vector3::Zero();
  s.disturbance = {0.3, -0.2, 0.1};
  s.delta_max = 1.0;
  // k_delta is raised from the hardware value 0.2 to 0.5 so that the
  // adaptive margin B stays positive.
  s.gains = GainSet::recipe(1.45, 0.4, 0.9, 0.5, 1.0);
  s.t_final = 30.0;
  return s;
}

}  // namespace so3track
