#include "so3track/controllers.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "so3track/diagnostics.hpp"

namespace so3track {

std::string_view to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::kAgts:
      return "AGTS";
    case ControllerMode::kGts:
      return "GTS";
    case ControllerMode::kAdaptiveAgts:
      return "aAGTS";
    case ControllerMode::kAdaptiveGts:
      return "aGTS";
  }
  return "?";
}

std::optional<ControllerMode> parse_controller_mode(std::string_view name) {
  if (name == "AGTS") return ControllerMode::kAgts;
  if (name == "GTS") return ControllerMode::kGts;
  if (name == "aAGTS" || name == "adaptive-agts") return ControllerMode::kAdaptiveAgts;
  if (name == "aGTS" || name == "adaptive-gts") return ControllerMode::kAdaptiveGts;
  return std::nullopt;
}

std::string_view to_string(Branch branch) {
  return branch == Branch::kShifted ? "shifted" : "nominal";
}

double mu_upper_bound(double k_r, double k_omega, double a) {
  return 4.0 * (1.0 - a) * k_r * k_omega /
         (4.0 * (1.0 - a) * k_r + k_omega * k_omega);
}

GainSet GainSet::recipe(double k_r, double k_omega, double epsilon,
                        double k_delta, double delta_max) {
  GainSet g;
  g.k_r = k_r;
  g.k_omega = k_omega;
  g.k_delta = k_delta;
  g.a = epsilon;
  g.mu = mu_upper_bound(k_r, k_omega, g.a) * epsilon;
  g.epsilon = epsilon;
  g.delta_max = delta_max;
  return g;
}

double adaptive_margin(const GainSet& g) {
  const double sk = std::sqrt(g.k_r);
  return 2.0 * g.a * (sk - g.mu) / (sk + g.mu) * g.k_r -
         g.delta_max * g.delta_max / (2.0 * g.k_delta);
}

Vector3 agts_torque(const Matrix3& r, const Vector3& omega,
                    const ReferenceSample& ref, const GainSet& gains,
                    const InertiaMatrix& inertia) {
  const Matrix3& j = inertia.matrix();
  const Vector3 e_r = attitude_error_vector(r, ref.rd.matrix());
  const Vector3 e_omega = omega - ref.omega_d;
  return -(j * omega).cross(omega) +
         j * (-gains.k_r * e_r - gains.k_omega * e_omega +
              omega.cross(ref.omega_d) + ref.omega_d_dot);
}

Vector3 adaptive_torque(const RigidBodyState& state, const ReferenceSample& ref,
                        const GainSet& gains, const InertiaMatrix& inertia,
                        const AdaptiveState& adaptive) {
  return agts_torque(state, ref, gains, inertia) - adaptive.delta_hat;
}

Vector3 estimate_rate(const Vector3& e_omega, const Vector3& e_r,
                      const GainSet& gains, const InertiaMatrix& inertia) {
  return gains.k_delta * inertia.inverse() * (e_omega + gains.mu * e_r);
}

AdaptiveState adaptive_update(const AdaptiveState& adaptive,
                              const Vector3& e_omega, const Vector3& e_r,
                              const GainSet& gains, const InertiaMatrix& inertia,
                              double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("adaptive update step must be positive");
  }
  return {adaptive.delta_hat + h * estimate_rate(e_omega, e_r, gains, inertia)};
}

GainReport validate_gains(const GainSet& g, ControllerMode mode) {
  GainReport report;
  const auto fail = [&report](std::string condition, double value) {
    std::ostringstream detail;
    detail.precision(17);
    detail << "value " << value;
    report.violations.push_back({std::move(condition), detail.str()});
  };

  if (!(g.k_r > 0.0)) fail("k_r > 0", g.k_r);
  if (!(g.k_omega > 0.0)) fail("k_omega > 0", g.k_omega);
  if (!(g.a > 0.0 && g.a < 1.0)) fail("0 < a < 1", g.a);
  if (!(g.epsilon > 0.0 && g.epsilon < 1.0)) fail("0 < epsilon < 1", g.epsilon);

  report.mu_bound = mu_upper_bound(g.k_r, g.k_omega, g.a);
  if (!(g.mu > 0.0 && g.mu < report.mu_bound)) {
    std::ostringstream cond;
    cond.precision(17);
    cond << "0 < mu < 4(1-a) k_r k_omega / (4(1-a) k_r + k_omega^2) = "
         << report.mu_bound;
    fail(cond.str(), g.mu);
  }
  if (!(g.mu < std::sqrt(g.k_r))) fail("mu < sqrt(k_r)", g.mu);

  const QuadraticForms q = quadratic_forms(g);
  report.w3_min_eigenvalue = symmetric_eigenvalues(q.w3).first;
  report.sigma = report.w3_min_eigenvalue / symmetric_eigenvalues(q.w2).second;
  if (!(report.w3_min_eigenvalue > 0.0)) {
    fail("W3 positive-definite", report.w3_min_eigenvalue);
  }

  if (is_adaptive(mode)) {
    if (!(g.k_delta > 0.0)) fail("k_delta > 0", g.k_delta);
    if (!(g.delta_max >= 0.0)) fail("delta_max >= 0", g.delta_max);
    report.adaptive_margin = adaptive_margin(g);
    if (!(*report.adaptive_margin > 0.0)) {
      fail("2a (sqrt(k_r) - mu)/(sqrt(k_r) + mu) k_r - delta_max^2/(2 k_delta) > 0",
           *report.adaptive_margin);
    }
  }
  return report;
}

ShiftedReference::ShiftedReference(Rotation u0, double theta0, double theta_b0,
                                   double gamma, ReferenceProvider base)
    : u0_(std::move(u0)),
      theta0_(theta0),
      theta_b0_(theta_b0),
      gamma_(gamma),
      base_(std::move(base)) {
  if (!(theta_b0 >= 0.0) || (theta_b0 > 0.0 && !(theta_b0 < theta0))) {
    std::ostringstream msg;
    msg << "shift angle theta_b0 = " << theta_b0 << " must lie in (0, "
        << theta0 << ")";
    throw InvariantViolation(msg.str());
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvariantViolation("shift decay rate gamma must be positive");
  }
  if (!base_) {
    throw std::invalid_argument("shifted reference requires a base reference");
  }
}

ShiftedReference ShiftedReference::build(const Rotation& r0,
                                         ReferenceProvider base,
                                         const GainSet& g, ControllerMode mode) {
  if (!uses_shifted_reference(mode)) {
    throw std::invalid_argument("shifted reference requires GTS or aGTS mode");
  }
  const ReferenceSample ref0 = base(0.0);
  const ConjugacyDecomposition dec =
      conjugacy_decompose(r0 * ref0.rd.transpose());
  const double theta0 = dec.theta;
  if (theta0 == 0.0) {
    throw DegenerateInitialError(
        "initial attitude equals the reference; no shift is needed");
  }

  const bool adaptive = is_adaptive(mode);
  const double b = adaptive ? adaptive_margin(g) : 0.0;
  if (adaptive && !(b > 0.0)) {
    throw InvariantViolation("adaptive margin B must be positive to shift");
  }
  // Admissible 1 - cos(theta0 - theta_b0).
  const double cos_budget = adaptive ? b * g.epsilon / g.k_r : 2.0 * g.a * g.epsilon;

  // When theta0 itself is within the budget, every theta_b0 in (0, theta0)
  // is admissible and the recipe's second term would be non-positive.
  const double within_budget = theta0 - std::acos(std::max(1.0 - cos_budget, -1.0));
  const double theta_b0 =
      within_budget > 0.0 ? std::min(theta0 * g.epsilon, within_budget)
                          : theta0 * g.epsilon;
  if (!(theta_b0 > 0.0 && theta_b0 < theta0)) {
    std::ostringstream msg;
    msg << "computed theta_b0 = " << theta_b0 << " outside (0, " << theta0 << ")";
    throw InvariantViolation(msg.str());
  }
  if (1.0 - std::cos(theta0 - theta_b0) > cos_budget * (1.0 + 1e-12)) {
    throw InvariantViolation("shifted initial attitude error exceeds its budget");
  }

  const double gamma_bound =
      adaptive ? 2.0 / theta_b0 * std::sqrt(2.0 * (1.0 - g.epsilon) * b)
               : 4.0 / theta_b0 * std::sqrt(g.a * g.k_r * (1.0 - g.epsilon));
  const double gamma = gamma_bound * g.epsilon;
  if (!(gamma > 0.0 && gamma < gamma_bound)) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " violates 0 < gamma < " << gamma_bound;
    throw InvariantViolation(msg.str());
  }
  return ShiftedReference(dec.u, theta0, theta_b0, gamma, std::move(base));
}

double ShiftedReference::theta_b(double t) const {
  return theta_b0_ * std::exp(-0.5 * gamma_ * t);
}

double ShiftedReference::theta_b_rate(double t) const {
  return -0.5 * gamma_ * theta_b(t);
}

ReferenceSample ShiftedReference::sample(double t) const {
  const ReferenceSample ref = base_(t);
  const double angle = theta_b(t);
  const double rate = -0.5 * gamma_ * angle;
  const double accel = 0.25 * gamma_ * gamma_ * angle;

  const Rotation rd = u0_ * rotation_z(angle) * u0_.transpose() * ref.rd;
  const Vector3 w = rd.transpose() * Vector3(u0_.matrix().col(2));
  const Vector3 omega = ref.omega_d + rate * w;
  // d/dt (R~_d^T u) = -Omega~_d x (R~_d^T u).
  const Vector3 omega_dot =
      ref.omega_d_dot + accel * w - rate * omega.cross(w);
  return {rd, omega, omega_dot};
}

TrackingController::TrackingController(ControllerMode mode, const GainSet& gains,
                                       const InertiaMatrix& inertia,
                                       ReferenceProvider base,
                                       const RigidBodyState& initial)
    : mode_(mode), gains_(gains), inertia_(inertia), base_(std::move(base)) {
  const GainReport report = validate_gains(gains, mode);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "gains rejected for " << to_string(mode) << ": "
        << report.violations.front().condition << " ("
        << report.violations.front().detail << ")";
    throw InvalidGains(msg.str());
  }
  initial_v0_ = eval_v0(initial, base_(0.0), gains);
  threshold_ = is_adaptive(mode) ? *report.adaptive_margin : 2.0 * gains.a * gains.k_r;
  if (uses_shifted_reference(mode) && initial_v0_ > threshold_) {
    branch_ = Branch::kShifted;
    shifted_ = ShiftedReference::build(initial.r, base_, gains, mode);
  }
}

ReferenceSample TrackingController::reference(double t) const {
  return shifted_ ? shifted_->sample(t) : base_(t);
}

ControlOutput TrackingController::control(double t, const Matrix3& r,
                                          const Vector3& omega,
                                          const Vector3& estimate) const {
  const ReferenceSample ref = reference(t);
  ControlOutput out;
  out.torque = agts_torque(r, omega, ref, gains_, inertia_);
  if (is_adaptive(mode_)) {
    out.torque -= estimate;
    out.estimate_rate = estimate_rate(omega - ref.omega_d,
                                      attitude_error_vector(r, ref.rd.matrix()),
                                      gains_, inertia_);
  }
  return out;
}

Vector3 TrackingController::torque(double t, const RigidBodyState& state,
                                   const AdaptiveState& adaptive) const {
  return control(t, state.r.matrix(), state.omega, adaptive.delta_hat).torque;
}

RoaReport roa_membership(const Rotation& r0, const Vector3& omega0,
                         const ReferenceSample& ref0, const GainSet& g,
                         ControllerMode mode) {
  RoaReport out;
  const bool adaptive = is_adaptive(mode);
  out.theta0 = conjugacy_angle(r0 * ref0.rd.transpose());
  out.e_omega_norm = (omega0 - ref0.omega_d).norm();
  out.v0 = eval_v0(r0.matrix(), omega0, ref0, g);
  if (adaptive) {
    out.adaptive_margin = adaptive_margin(g);
    out.threshold = *out.adaptive_margin;
  } else {
    out.threshold = 2.0 * g.a * g.k_r;
  }

  const double attitude_cost = g.k_r * (1.0 - std::cos(out.theta0));
  const double nominal_sq = adaptive ? out.threshold - attitude_cost
                                     : 2.0 * g.k_r * (2.0 * g.a - 1.0 + std::cos(out.theta0));
  out.nominal_bound =
      nominal_sq >= 0.0 ? std::sqrt(nominal_sq) : std::numeric_limits<double>::quiet_NaN();
  out.in_nominal_set = attitude_cost + 0.5 * out.e_omega_norm * out.e_omega_norm <=
                       out.threshold;

  const double velocity_budget =
      adaptive ? std::sqrt(2.0 * (1.0 - g.epsilon) * std::max(out.threshold, 0.0))
               : 2.0 * std::sqrt(g.a * g.k_r * (1.0 - g.epsilon));
  out.shifted_bound = velocity_budget;

  const ReferenceProvider frozen = [ref0](double) { return ref0; };
  if (out.theta0 > 0.0 && (!adaptive || out.threshold > 0.0)) {
    try {
      const ShiftedReference shifted =
          ShiftedReference::build(r0, frozen, g, adaptive ? ControllerMode::kAdaptiveGts
                                                          : ControllerMode::kGts);
      out.theta_b0 = shifted.theta_b0();
      out.gamma = shifted.gamma();
      out.shifted_bound = velocity_budget - 0.5 * shifted.gamma() * shifted.theta_b0();

      const ReferenceSample s0 = shifted.sample(0.0);
      const double shifted_e_omega = (omega0 - s0.omega_d).norm();
      out.in_shifted_set = g.k_r * (1.0 - std::cos(out.theta0 - shifted.theta_b0())) +
                               0.5 * shifted_e_omega * shifted_e_omega <=
                           out.threshold;
    } catch (const InvariantViolation&) {
      out.shifted_bound = std::numeric_limits<double>::quiet_NaN();
    }
  }

  const bool nominal_ok = std::isfinite(out.nominal_bound);
  const bool shifted_ok = std::isfinite(out.shifted_bound);
  double best = -std::numeric_limits<double>::infinity();
  if (nominal_ok) best = out.nominal_bound;
  out.active_bound = "nominal";
  if (shifted_ok && (!nominal_ok || out.shifted_bound > out.nominal_bound)) {
    best = out.shifted_bound;
    out.active_bound = "shifted";
  }
  out.in_region = out.e_omega_norm < best;
  return out;
}

}  // namespace so3track
