#pragma once

/**
 * @file diagnostics.hpp
 * Lyapunov function evaluation, the 2x2 quadratic-form bounds and
 * discrete checks of the exponential envelope / monotonicity claims.
 */

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "so3track/dynamics.hpp"
#include "so3track/gains.hpp"

namespace so3track {

using Matrix2 = Eigen::Matrix2d;

/// V0 = k_r/4 ||R - R_d||^2 + 1/2 ||Omega - Omega_d||^2.
double eval_v0(const Matrix3& r, const Vector3& omega,
               const ReferenceSample& ref, const GainSet& gains);

/// V = V0 + mu <e_R, e_Omega>.
double eval_v(const Matrix3& r, const Vector3& omega, const ReferenceSample& ref,
              const GainSet& gains);

/// V_bar = V + ||true_delta - estimate||^2 / (2 k_delta). Simulation only.
double eval_v_bar(const Matrix3& r, const Vector3& omega,
                  const ReferenceSample& ref, const GainSet& gains,
                  const Vector3& estimate, const Vector3& true_delta);

inline double eval_v0(const RigidBodyState& s, const ReferenceSample& ref,
                      const GainSet& gains) {
  return eval_v0(s.r.matrix(), s.omega, ref, gains);
}
inline double eval_v(const RigidBodyState& s, const ReferenceSample& ref,
                     const GainSet& gains) {
  return eval_v(s.r.matrix(), s.omega, ref, gains);
}
inline double eval_v_bar(const RigidBodyState& s, const ReferenceSample& ref,
                         const GainSet& gains, const Vector3& estimate,
                         const Vector3& true_delta) {
  return eval_v_bar(s.r.matrix(), s.omega, ref, gains, estimate, true_delta);
}

/// Eigenvalues (min, max) of a symmetric 2x2 matrix in closed form.
std::pair<double, double> symmetric_eigenvalues(const Matrix2& m);

/// W1, W2 bound V from below/above in z = (||E_R||, ||e_Omega||); W3 bounds
/// -dV/dt from below inside the attitude ball ||E_R|| <= 2 sqrt(2a).
struct QuadraticForms {
  Matrix2 w1;
  Matrix2 w2;
  Matrix2 w3;
};

QuadraticForms quadratic_forms(const GainSet& gains);

struct StabilityMatrices {
  Matrix2 w1;
  Matrix2 w2;
  Matrix2 w3;
  double sigma = 0.0;  // lambda_min(W3) / lambda_max(W2)
};

/// Throws InvalidGains if W3 is not positive-definite.
StabilityMatrices stability_matrices(const GainSet& gains);

struct LyapunovSample {
  double t = 0.0;
  double v0 = 0.0;
  double v = 0.0;
  double v_bar = 0.0;  // meaningful for adaptive runs only
  double e_r_norm = 0.0;
  double e_omega_norm = 0.0;
  double e_delta_norm = 0.0;
};

struct EnvelopeViolation {
  double t = 0.0;
  std::string what;
};

struct EnvelopeReport {
  std::vector<EnvelopeViolation> violations;
  double max_envelope_ratio = 0.0;  // max V(t) / (V(0) e^{-sigma t})
  double max_v0_increase = 0.0;     // largest step-to-step rise of V0

  bool ok() const { return violations.empty(); }
};

/**
 * Checks V(t) <= (1 + tol) V(0) e^{-sigma t} and that V0 never rises by more
 * than `step_tol` between consecutive samples.
 */
EnvelopeReport check_envelope(std::span<const LyapunovSample> series,
                              double sigma, double tol = 1e-3,
                              double step_tol = 1e-9);

/// Largest increase values[k+1] - values[k] (0 for monotone sequences).
double max_step_increase(std::span<const double> values);

/**
 * Fits C = max value(t) e^{rate t} over samples with t <= t_fit and returns
 * the largest ratio value(t) / (C e^{-rate t}) over the remaining samples.
 * A result <= 1 means the decay exponent `rate` is sustained beyond the fit
 * window.
 */
double decay_extrapolation_ratio(std::span<const double> times,
                                 std::span<const double> values, double rate,
                                 double t_fit, double floor = 1e-12);

}  // namespace so3track
