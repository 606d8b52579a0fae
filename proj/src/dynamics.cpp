#include "so3track/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace so3track {

InertiaMatrix::InertiaMatrix(const Matrix3& j) : j_(j) {
  if (!j.allFinite() || (j - j.transpose()).norm() > 1e-12) {
    throw SingularInertia("inertia matrix must be finite and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(j);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    std::ostringstream msg;
    msg << "inertia matrix must be positive-definite (min eigenvalue "
        << eig.eigenvalues().minCoeff() << ")";
    throw SingularInertia(msg.str());
  }
  j_inv_ = j.inverse();
}

InertiaMatrix InertiaMatrix::diagonal(double jxx, double jyy, double jzz) {
  return InertiaMatrix(Vector3(jxx, jyy, jzz).asDiagonal().toDenseMatrix());
}

Disturbance::Disturbance(const Vector3& delta, double delta_max)
    : delta_(delta), delta_max_(delta_max) {
  if (!delta.allFinite() || !(delta_max >= 0.0) || delta.norm() > delta_max) {
    std::ostringstream msg;
    msg << "disturbance norm " << delta.norm() << " exceeds its bound "
        << delta_max;
    throw std::invalid_argument(msg.str());
  }
}

StateDerivative state_derivative(const Matrix3& r, const Vector3& omega,
                                 const Vector3& tau, const Disturbance& dist,
                                 const InertiaMatrix& inertia) {
  const Matrix3& j = inertia.matrix();
  return {r * hat(omega),
          inertia.inverse() * ((j * omega).cross(omega) + tau + dist.delta())};
}

AugmentedState integrate_step(const AugmentedState& state, const ControlLaw& law,
                              const Disturbance& dist,
                              const InertiaMatrix& inertia, double t, double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("integration step must be positive");
  }
  struct Stage {
    Matrix3 r;
    Vector3 omega;
    Vector3 estimate;
  };
  const auto slope = [&](double ts, const Stage& s) {
    const ControlOutput u = law(ts, s.r, s.omega, s.estimate);
    const StateDerivative d = state_derivative(s.r, s.omega, u.torque, dist, inertia);
    return Stage{d.r_dot, d.omega_dot, u.estimate_rate};
  };
  const auto advance = [](const Stage& s, const Stage& k, double dt) {
    return Stage{s.r + dt * k.r, s.omega + dt * k.omega,
                 s.estimate + dt * k.estimate};
  };

  const Stage s0{state.body.r.matrix(), state.body.omega, state.estimate};
  const Stage k1 = slope(t, s0);
  const Stage k2 = slope(t + 0.5 * h, advance(s0, k1, 0.5 * h));
  const Stage k3 = slope(t + 0.5 * h, advance(s0, k2, 0.5 * h));
  const Stage k4 = slope(t + h, advance(s0, k3, h));

  const double w = h / 6.0;
  const Matrix3 r = s0.r + w * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
  const Vector3 omega =
      s0.omega + w * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
  const Vector3 estimate =
      s0.estimate +
      w * (k1.estimate + 2.0 * k2.estimate + 2.0 * k3.estimate + k4.estimate);
  return {{project_so3(r), omega}, estimate};
}

RigidBodyState integrate_step(const RigidBodyState& state,
                              const TorqueProvider& torque,
                              const Disturbance& dist,
                              const InertiaMatrix& inertia, double t, double h) {
  const ControlLaw law = [&torque](double ts, const Matrix3& r,
                                   const Vector3& omega, const Vector3&) {
    return ControlOutput{torque(ts, r, omega), Vector3::Zero()};
  };
  return integrate_step(AugmentedState{state, Vector3::Zero()}, law, dist,
                        inertia, t, h)
      .body;
}

ReferenceSample benchmark_reference(double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  Matrix3 rd;
  rd << c, -c * s, s * s,
        c * s, c * c * c - s * s, -c * s - c * c * s,
        s * s, c * s + c * c * s, c * c - c * s * s;
  return {Rotation(rd),
          Vector3(1.0 + c, s - s * c, c + s * s),
          Vector3(-s, c - c * c + s * s, -s + 2.0 * s * c)};
}

ReferenceProvider constant_reference(const Rotation& r_fixed) {
  return [r_fixed](double) {
    return ReferenceSample{r_fixed, Vector3::Zero(), Vector3::Zero()};
  };
}

ReferenceProvider fixed_axis_reference(const Rotation& r_start,
                                       const Vector3& axis, double rate) {
  // Validates the axis once up front.
  (void)exp_rodrigues(0.0, axis);
  return [r_start, axis, rate](double t) {
    return ReferenceSample{r_start * exp_rodrigues(rate * t, axis), rate * axis,
                           Vector3::Zero()};
  };
}

ReferenceProvider differentiated_reference(
    std::function<Rotation(double)> rd, std::function<Vector3(double)> omega_d,
    double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite-difference step must be positive");
  }
  return [rd = std::move(rd), omega_d = std::move(omega_d), step](double t) {
    const Vector3 accel = (omega_d(t + step) - omega_d(t - step)) / (2.0 * step);
    return ReferenceSample{rd(t), omega_d(t), accel};
  };
}

void check_reference_bounds(const ReferenceSample& sample, double cap) {
  const double w = sample.omega_d.norm();
  const double wdot = sample.omega_d_dot.norm();
  if (!std::isfinite(w) || !std::isfinite(wdot) || w > cap || wdot > cap) {
    std::ostringstream msg;
    msg << "reference angular velocity/acceleration out of bounds (|Omega_d| = "
        << w << ", |dOmega_d/dt| = " << wdot << ", cap " << cap << ")";
    throw InvalidReference(msg.str());
  }
}

}  // namespace so3track
