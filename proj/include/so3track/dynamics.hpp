#pragma once

/**
 * @file dynamics.hpp
 * Rotational equations of motion of a rigid body, reference trajectory
 * generators and the fixed-step RK4 integrator with SO(3) reprojection.
 */

#include <functional>
#include <stdexcept>

#include "so3track/so3.hpp"

namespace so3track {

class SingularInertia : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidReference : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric positive-definite moment of inertia [kg m^2].
class InertiaMatrix {
 public:
  /// Throws SingularInertia unless `j` is symmetric within 1e-12 with all
  /// eigenvalues positive.
  explicit InertiaMatrix(const Matrix3& j);
  static InertiaMatrix diagonal(double jxx, double jyy, double jzz);

  const Matrix3& matrix() const { return j_; }
  const Matrix3& inverse() const { return j_inv_; }

 private:
  Matrix3 j_;
  Matrix3 j_inv_;
};

struct RigidBodyState {
  Rotation r;
  Vector3 omega = Vector3::Zero();  // body frame [rad/s]
};

struct ReferenceSample {
  Rotation rd;
  Vector3 omega_d = Vector3::Zero();
  Vector3 omega_d_dot = Vector3::Zero();
};

/// Constant disturbance torque with a known bound on its magnitude.
class Disturbance {
 public:
  Disturbance() = default;
  /// Throws std::invalid_argument if |delta| > delta_max or delta_max < 0.
  Disturbance(const Vector3& delta, double delta_max);

  const Vector3& delta() const { return delta_; }
  double delta_max() const { return delta_max_; }

 private:
  Vector3 delta_ = Vector3::Zero();
  double delta_max_ = 0.0;
};

using ReferenceProvider = std::function<ReferenceSample(double)>;

/// Time derivative of the flattened state (R, Omega).
struct StateDerivative {
  Matrix3 r_dot;
  Vector3 omega_dot;
};

/// R_dot = R hat(Omega), I Omega_dot = (I Omega) x Omega + tau + Delta.
/// The attitude may be an unprojected integrator stage.
StateDerivative state_derivative(const Matrix3& r, const Vector3& omega,
                                 const Vector3& tau, const Disturbance& dist,
                                 const InertiaMatrix& inertia);
inline StateDerivative state_derivative(const RigidBodyState& state,
                                        const Vector3& tau,
                                        const Disturbance& dist,
                                        const InertiaMatrix& inertia) {
  return state_derivative(state.r.matrix(), state.omega, tau, dist, inertia);
}

/// Torque as a function of time and the (possibly unprojected) stage state.
using TorqueProvider =
    std::function<Vector3(double t, const Matrix3& r, const Vector3& omega)>;

/// Rigid-body state augmented with a disturbance estimate that evolves
/// together with it.
struct AugmentedState {
  RigidBodyState body;
  Vector3 estimate = Vector3::Zero();
};

/// Control torque and the rate of the disturbance estimate at one stage.
struct ControlOutput {
  Vector3 torque = Vector3::Zero();
  Vector3 estimate_rate = Vector3::Zero();
};

using ControlLaw = std::function<ControlOutput(
    double t, const Matrix3& r, const Vector3& omega, const Vector3& estimate)>;

/**
 * One classical RK4 step of size h on the ambient (R, Omega) state, followed
 * by polar reprojection of the attitude onto SO(3). The torque is evaluated
 * at every stage.
 */
RigidBodyState integrate_step(const RigidBodyState& state,
                              const TorqueProvider& torque,
                              const Disturbance& dist,
                              const InertiaMatrix& inertia, double t, double h);

/// Same as above for the 15-dimensional coupled (R, Omega, estimate) system.
AugmentedState integrate_step(const AugmentedState& state, const ControlLaw& law,
                              const Disturbance& dist,
                              const InertiaMatrix& inertia, double t, double h);

/// The benchmark tracking trajectory with R_d(0) = I and Omega_d(0) = (2, 0, 1).
ReferenceSample benchmark_reference(double t);

/// R_d(t) = r_fixed, Omega_d = Omega_d_dot = 0.
ReferenceProvider constant_reference(const Rotation& r_fixed);

/// R_d(t) = r_start exp(rate t hat(axis)), Omega_d = rate axis.
ReferenceProvider fixed_axis_reference(const Rotation& r_start,
                                       const Vector3& axis, double rate);

/// Builds a provider from attitude and angular-velocity functions; the
/// angular acceleration is a central difference of `omega_d` with step `step`.
ReferenceProvider differentiated_reference(
    std::function<Rotation(double)> rd, std::function<Vector3(double)> omega_d,
    double step = 1e-6);

/// Throws InvalidReference if |Omega_d| or |Omega_d_dot| exceeds `cap` or is
/// not finite.
void check_reference_bounds(const ReferenceSample& sample, double cap = 1e3);

}  // namespace so3track
