#pragma once

/**
 * @file so3.hpp
 * Rotation algebra on SO(3): hat/vee maps, the Rodrigues exponential,
 * conjugacy-class decomposition X = U Z_theta U^T, distances and the
 * attitude error maps used by the tracking controllers.
 */

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace so3track {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Tolerance on orthonormality and determinant accepted by Rotation.
inline constexpr double kRotationTolerance = 1e-9;

class So3Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonSkewInput : public So3Error {
 public:
  using So3Error::So3Error;
};

class NonUnitAxis : public So3Error {
 public:
  using So3Error::So3Error;
};

class DegenerateInput : public So3Error {
 public:
  using So3Error::So3Error;
};

class NotARotation : public So3Error {
 public:
  using So3Error::So3Error;
};

/**
 * A 3x3 matrix known to lie on SO(3) within kRotationTolerance.
 *
 * Construction from an arbitrary matrix checks ||R^T R - I|| and det(R);
 * products and transposes of valid rotations stay valid without a recheck.
 */
class Rotation {
 public:
  Rotation() : m_(Matrix3::Identity()) {}

  /// Throws NotARotation if `m` is not orthonormal with unit determinant.
  explicit Rotation(const Matrix3& m);

  static Rotation identity() { return Rotation(); }

  const Matrix3& matrix() const { return m_; }
  Rotation transpose() const { return Rotation(m_.transpose(), Trusted{}); }

  Rotation operator*(const Rotation& other) const {
    return Rotation(m_ * other.m_, Trusted{});
  }
  Vector3 operator*(const Vector3& v) const { return m_ * v; }

  /// ||R^T R - I|| (Frobenius).
  double orthonormality_error() const;

 private:
  struct Trusted {};
  Rotation(const Matrix3& m, Trusted) : m_(m) {}

  Matrix3 m_;
};

/// A rotation split as X = u * Z_theta * u^T with theta in [0, pi].
struct ConjugacyDecomposition {
  double theta = 0.0;
  Rotation u;
};

Matrix3 hat(const Vector3& v);

/// Inverse of hat. Throws NonSkewInput when the symmetric part of `m`
/// exceeds `tol` in Frobenius norm.
Vector3 vee(const Matrix3& m, double tol = 1e-9);

/// Skew part of an arbitrary matrix, mapped to R^3: vee((m - m^T) / 2).
Vector3 vee_skew(const Matrix3& m);

/// exp(theta * hat(axis)) = I + sin(theta) v^ + (1 - cos(theta)) v^2.
/// Throws NonUnitAxis unless |axis| = 1 within 1e-9.
Rotation exp_rodrigues(double theta, const Vector3& axis);

/// Rotation about e3 by theta.
Rotation rotation_z(double theta);

/// Frobenius distance ||r1 - r2||, in [0, 2 sqrt 2].
double rotation_distance(const Rotation& r1, const Rotation& r2);

/// Rotation angle arccos((tr X - 1) / 2) with the argument clamped to [-1, 1].
double conjugacy_angle(const Rotation& x);
double conjugacy_angle(const Matrix3& x);

/**
 * Finds (theta, U) with X = U Z_theta U^T.
 *
 * theta = 0 returns U = I. Close to pi the axis is read from the rank-one
 * matrix (X + I)/2 instead of dividing by sin(theta).
 */
ConjugacyDecomposition conjugacy_decompose(const Rotation& x);

/// e_R = 1/2 (R_d^T R - R^T R_d)^vee. Accepts off-manifold inputs so it can
/// be evaluated on intermediate integrator stages.
Vector3 attitude_error_vector(const Matrix3& r, const Matrix3& rd);
inline Vector3 attitude_error_vector(const Rotation& r, const Rotation& rd) {
  return attitude_error_vector(r.matrix(), rd.matrix());
}

/// C(R^T R_d) = 1/2 (tr(R^T R_d) I - R^T R_d); operator 2-norm <= 1 on SO(3).
Matrix3 transport_matrix(const Matrix3& r, const Matrix3& rd);
inline Matrix3 transport_matrix(const Rotation& r, const Rotation& rd) {
  return transport_matrix(r.matrix(), rd.matrix());
}

/**
 * Nearest rotation in Frobenius norm (orthogonal polar factor).
 *
 * Requires m within Frobenius distance 0.5 of SO(3); throws DegenerateInput
 * when det(m) <= 0 or the input is too far from the group.
 */
Rotation project_so3(const Matrix3& m);

}  // namespace so3track
