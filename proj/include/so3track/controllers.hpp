#pragma once

/**
 * @file controllers.hpp
 * Smooth attitude tracking controllers on SO(3).
 *
 * agts_torque is the nominal feedback/feedforward law. When the initial
 * state lies outside its guaranteed region of attraction, TrackingController
 * instead tracks a shifted reference R~_d(t) = U0 Z_{theta_b(t)} U0^T R_d(t)
 * that starts close to R(0) on the same conjugacy class and relaxes back to
 * R_d(t) exponentially. The choice is made once at t = 0, so the torque is
 * continuous in time.
 */

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "so3track/dynamics.hpp"
#include "so3track/gains.hpp"

namespace so3track {

class DegenerateInitialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdaptiveState {
  Vector3 delta_hat = Vector3::Zero();
};

/// tau = -(I Omega) x Omega + I(-k_r e_R - k_omega e_Omega + Omega x Omega_d
///       + dOmega_d/dt).
Vector3 agts_torque(const Matrix3& r, const Vector3& omega,
                    const ReferenceSample& ref, const GainSet& gains,
                    const InertiaMatrix& inertia);
inline Vector3 agts_torque(const RigidBodyState& state,
                           const ReferenceSample& ref, const GainSet& gains,
                           const InertiaMatrix& inertia) {
  return agts_torque(state.r.matrix(), state.omega, ref, gains, inertia);
}

/// agts_torque minus the disturbance estimate.
Vector3 adaptive_torque(const RigidBodyState& state, const ReferenceSample& ref,
                        const GainSet& gains, const InertiaMatrix& inertia,
                        const AdaptiveState& adaptive);

/// d(delta_hat)/dt = k_delta I^{-1} (e_Omega + mu e_R).
Vector3 estimate_rate(const Vector3& e_omega, const Vector3& e_r,
                      const GainSet& gains, const InertiaMatrix& inertia);

/// Advances the estimate by h with the errors held constant. Closed-loop
/// runs integrate the estimate inside the state RK4 stages instead.
AdaptiveState adaptive_update(const AdaptiveState& adaptive,
                              const Vector3& e_omega, const Vector3& e_r,
                              const GainSet& gains, const InertiaMatrix& inertia,
                              double h);

struct GainViolation {
  std::string condition;
  std::string detail;
};

struct GainReport {
  std::vector<GainViolation> violations;
  double mu_bound = 0.0;
  double w3_min_eigenvalue = 0.0;
  double sigma = 0.0;
  std::optional<double> adaptive_margin;  // B, adaptive modes only

  bool ok() const { return violations.empty(); }
};

/// Checks every gain inequality required by `mode`. Never throws.
GainReport validate_gains(const GainSet& gains, ControllerMode mode);

/**
 * Time-varying reference shifted along a conjugacy class:
 *   theta_b(t) = theta_b0 e^{-gamma t / 2}
 *   R~_d(t)    = U0 Z_{theta_b(t)} U0^T R_d(t)
 *   Omega~_d   = Omega_d + dtheta_b/dt R~_d^T U0 e3
 */
class ShiftedReference {
 public:
  /// theta_b0 = 0 is accepted and reproduces the base reference exactly.
  ShiftedReference(Rotation u0, double theta0, double theta_b0, double gamma,
                   ReferenceProvider base);

  /**
   * Decomposes R(0) R_d(0)^T = U0 Z_theta0 U0^T and picks theta_b0 and gamma
   * from the epsilon-scaled recipe of the mode (GTS or aGTS). Throws
   * DegenerateInitialError when theta0 = 0 and InvariantViolation when the
   * resulting parameters break their admissibility bounds.
   */
  static ShiftedReference build(const Rotation& r0, ReferenceProvider base,
                                const GainSet& gains, ControllerMode mode);

  ReferenceSample sample(double t) const;
  ReferenceSample base_sample(double t) const { return base_(t); }

  double theta_b(double t) const;
  double theta_b_rate(double t) const;

  const Rotation& u0() const { return u0_; }
  double theta0() const { return theta0_; }
  double theta_b0() const { return theta_b0_; }
  double gamma() const { return gamma_; }

 private:
  Rotation u0_;
  double theta0_;
  double theta_b0_;
  double gamma_;
  ReferenceProvider base_;
};

enum class Branch { kNominal, kShifted };

std::string_view to_string(Branch branch);

/**
 * One of the four strategies bound to an initial condition.
 *
 * AGTS/aAGTS always track the base reference. GTS/aGTS compare V0 at t = 0
 * against 2 a k_r (GTS) or B (aGTS); at or below the threshold they behave
 * like AGTS/aAGTS, above it they track the shifted reference.
 */
class TrackingController {
 public:
  /// Throws InvalidGains if `gains` fail validate_gains for `mode`.
  TrackingController(ControllerMode mode, const GainSet& gains,
                     const InertiaMatrix& inertia, ReferenceProvider base,
                     const RigidBodyState& initial);

  ControllerMode mode() const { return mode_; }
  Branch branch() const { return branch_; }
  const GainSet& gains() const { return gains_; }
  const InertiaMatrix& inertia() const { return inertia_; }
  double initial_v0() const { return initial_v0_; }
  /// 2 a k_r for GTS/AGTS, B for the adaptive modes.
  double branch_threshold() const { return threshold_; }
  const std::optional<ShiftedReference>& shifted() const { return shifted_; }

  /// Reference actually tracked (shifted or base).
  ReferenceSample reference(double t) const;
  ReferenceSample base_reference(double t) const { return base_(t); }

  ControlOutput control(double t, const Matrix3& r, const Vector3& omega,
                        const Vector3& estimate) const;
  Vector3 torque(double t, const RigidBodyState& state,
                 const AdaptiveState& adaptive = {}) const;

 private:
  ControllerMode mode_;
  GainSet gains_;
  InertiaMatrix inertia_;
  ReferenceProvider base_;
  Branch branch_ = Branch::kNominal;
  double initial_v0_ = 0.0;
  double threshold_ = 0.0;
  std::optional<ShiftedReference> shifted_;
};

/// Membership of an initial condition in the guaranteed regions of attraction.
struct RoaReport {
  double theta0 = 0.0;
  double e_omega_norm = 0.0;
  double v0 = 0.0;
  double threshold = 0.0;            // 2 a k_r, or B for adaptive modes
  double nominal_bound = 0.0;        // first argument of the max (NaN if < 0)
  double shifted_bound = 0.0;        // second argument of the max
  std::string active_bound;          // "nominal" or "shifted"
  bool in_region = false;            // e_Omega(0) below the max of both bounds
  bool in_nominal_set = false;       // R1: V0(0) <= threshold
  bool in_shifted_set = false;       // R3: shifted V0(0) <= threshold
  std::optional<double> theta_b0;
  std::optional<double> gamma;
  std::optional<double> adaptive_margin;
};

RoaReport roa_membership(const Rotation& r0, const Vector3& omega0,
                         const ReferenceSample& ref0, const GainSet& gains,
                         ControllerMode mode);

}  // namespace so3track
