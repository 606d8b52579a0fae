#include "so3track/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace so3track {

Rotation::Rotation(const Matrix3& m) : m_(m) {
  if (!m.allFinite()) {
    throw NotARotation("rotation matrix has non-finite entries");
  }
  const double orth = orthonormality_error();
  const double det = m.determinant();
  if (orth > kRotationTolerance || std::abs(det - 1.0) > kRotationTolerance) {
    std::ostringstream msg;
    msg << "matrix is not on SO(3): ||R^T R - I|| = " << orth
        << ", det = " << det;
    throw NotARotation(msg.str());
  }
}

double Rotation::orthonormality_error() const {
  return (m_.transpose() * m_ - Matrix3::Identity()).norm();
}

Matrix3 hat(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vector3 vee(const Matrix3& m, double tol) {
  const double sym = (0.5 * (m + m.transpose())).norm();
  if (!(sym <= tol)) {
    std::ostringstream msg;
    msg << "vee of a non-skew matrix (symmetric part " << sym << ")";
    throw NonSkewInput(msg.str());
  }
  return vee_skew(m);
}

Vector3 vee_skew(const Matrix3& m) {
  return 0.5 * Vector3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Rotation exp_rodrigues(double theta, const Vector3& axis) {
  if (!axis.allFinite() || std::abs(axis.norm() - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "rotation axis must be a unit vector (norm " << axis.norm() << ")";
    throw NonUnitAxis(msg.str());
  }
  const Matrix3 k = hat(axis);
  const Matrix3 r =
      Matrix3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * k * k;
  return Rotation(r);
}

Rotation rotation_z(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return Rotation(r);
}

double rotation_distance(const Rotation& r1, const Rotation& r2) {
  return (r1.matrix() - r2.matrix()).norm();
}

double conjugacy_angle(const Matrix3& x) {
  // atan2 keeps full precision near 0 and pi where arccos loses digits.
  const double c = std::clamp((x.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double s = vee_skew(x).norm();
  return std::atan2(s, c);
}

double conjugacy_angle(const Rotation& x) { return conjugacy_angle(x.matrix()); }

namespace {

constexpr double kNearPi = 1e-4;

// First nonzero component nonnegative.
Vector3 canonical_sign(const Vector3& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v(i)) > 1e-12) {
      return v(i) < 0.0 ? Vector3(-v) : v;
    }
  }
  return v;
}

// Axis of a rotation by ~pi from (X + X^T)/2 + I = (1 + c) I + (1 - c) v v^T.
Vector3 axis_near_pi(const Matrix3& x, double c) {
  const Matrix3 outer =
      (0.5 * (x + x.transpose()) - c * Matrix3::Identity()) / (1.0 - c);
  Eigen::Index pivot = 0;
  outer.diagonal().maxCoeff(&pivot);
  return outer.col(pivot).normalized();
}

Rotation frame_from_axis(const Vector3& u3) {
  Eigen::Index least = 0;
  u3.cwiseAbs().minCoeff(&least);
  Vector3 u1 = Vector3::Unit(least);
  u1 = (u1 - u1.dot(u3) * u3).normalized();
  const Vector3 u2 = u3.cross(u1);
  Matrix3 u;
  u << u1, u2, u3;
  return Rotation(u);
}

}  // namespace

ConjugacyDecomposition conjugacy_decompose(const Rotation& x) {
  const Matrix3& m = x.matrix();
  const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Vector3 skew = vee_skew(m);
  const double s = skew.norm();
  const double theta = std::atan2(s, c);

  if (s == 0.0 && c > 0.0) {
    return {0.0, Rotation::identity()};
  }

  Vector3 axis;
  if (theta > std::numbers::pi - kNearPi) {
    axis = axis_near_pi(m, c);
    const double d_plus = (exp_rodrigues(theta, axis).matrix() - m).norm();
    const double d_minus = (exp_rodrigues(theta, -axis).matrix() - m).norm();
    if (std::abs(d_plus - d_minus) <= 1e-14) {
      axis = canonical_sign(axis);
    } else if (d_minus < d_plus) {
      axis = -axis;
    }
  } else {
    axis = skew / s;
  }

  ConjugacyDecomposition out{theta, frame_from_axis(axis)};
  const double residual =
      (out.u.matrix() * rotation_z(theta).matrix() * out.u.matrix().transpose() - m)
          .norm();
  if (residual > 1e-6) {
    std::ostringstream msg;
    msg << "conjugacy decomposition failed to reconstruct input (residual "
        << residual << ")";
    throw DegenerateInput(msg.str());
  }
  return out;
}

Vector3 attitude_error_vector(const Matrix3& r, const Matrix3& rd) {
  return vee_skew(rd.transpose() * r);
}

Matrix3 transport_matrix(const Matrix3& r, const Matrix3& rd) {
  const Matrix3 q = r.transpose() * rd;
  return 0.5 * (q.trace() * Matrix3::Identity() - q);
}

Rotation project_so3(const Matrix3& m) {
  if (!m.allFinite()) {
    throw DegenerateInput("cannot project a non-finite matrix onto SO(3)");
  }
  const double det = m.determinant();
  if (det <= 0.0) {
    std::ostringstream msg;
    msg << "cannot project a matrix with det = " << det << " onto SO(3)";
    throw DegenerateInput(msg.str());
  }
  Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Rotation(svd.matrixU() * svd.matrixV().transpose());
}

}  // namespace so3track
