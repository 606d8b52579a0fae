#include "so3track/dynamics.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace so3track {
namespace {

using testing::Sampler;

const InertiaMatrix kBody = InertiaMatrix::diagonal(3.0, 2.0, 1.0);

TorqueProvider no_torque() {
  return [](double, const Matrix3&, const Vector3&) { return Vector3::Zero().eval(); };
}

TEST(InertiaMatrixTest, RejectsBadMatrices) {
  EXPECT_THROW(InertiaMatrix::diagonal(1.0, 0.0, 1.0), SingularInertia);
  EXPECT_THROW(InertiaMatrix::diagonal(1.0, -2.0, 1.0), SingularInertia);
  Matrix3 asym = Matrix3::Identity();
  asym(0, 1) = 1e-6;
  EXPECT_THROW(InertiaMatrix{asym}, SingularInertia);
  EXPECT_LT((kBody.inverse() * kBody.matrix() - Matrix3::Identity()).norm(), 1e-15);
}

TEST(DisturbanceTest, EnforcesBound) {
  EXPECT_NO_THROW(Disturbance(Vector3(1, -2, 0.5), 3.0));
  EXPECT_THROW(Disturbance(Vector3(3, 0, 0.1), 3.0), std::invalid_argument);
  EXPECT_THROW(Disturbance(Vector3::Zero(), -1.0), std::invalid_argument);
}

TEST(StateDerivativeTest, Equilibrium) {
  const StateDerivative d = state_derivative(RigidBodyState{}, Vector3::Zero(), {}, kBody);
  EXPECT_EQ(d.r_dot, Matrix3::Zero());
  EXPECT_EQ(d.omega_dot, Vector3::Zero());
}

TEST(StateDerivativeTest, PrincipalAxisSpin) {
  const StateDerivative d =
      state_derivative(RigidBodyState{Rotation(), Vector3(1, 0, 0)}, Vector3::Zero(), {}, kBody);
  EXPECT_EQ(d.omega_dot, Vector3::Zero());
  EXPECT_EQ(d.r_dot, hat(Vector3(1, 0, 0)));
}

TEST(StateDerivativeTest, HandCrossProduct) {
  const StateDerivative d =
      state_derivative(RigidBodyState{Rotation(), Vector3(1, 1, 0)}, Vector3::Zero(), {}, kBody);
  EXPECT_LT((d.omega_dot - Vector3(0, 0, 1)).norm(), 1e-15);
}

TEST(StateDerivativeTest, TorqueAndDisturbanceEnterAdditively) {
  Sampler s(21);
  for (int i = 0; i < 100; ++i) {
    const RigidBodyState st{s.rotation(), s.gaussian3()};
    const Vector3 tau = s.gaussian3();
    const Vector3 delta = s.gaussian3();
    const Disturbance dist(delta, delta.norm());
    const Vector3 j_omega = kBody.matrix() * st.omega;
    const Vector3 expected =
        kBody.inverse() * (testing::cross_by_hand(j_omega, st.omega) + tau + delta);
    const StateDerivative d = state_derivative(st, tau, dist, kBody);
    EXPECT_LT((d.omega_dot - expected).norm(), 1e-12);
    EXPECT_LT((d.r_dot - st.r.matrix() * hat(st.omega)).norm(), 1e-14);
  }
}

TEST(IntegrateStepTest, RejectsNonPositiveStep) {
  EXPECT_THROW(integrate_step(RigidBodyState{}, no_torque(), {}, kBody, 0.0, 0.0),
               std::invalid_argument);
  EXPECT_THROW(integrate_step(RigidBodyState{}, no_torque(), {}, kBody, 0.0, -1e-3),
               std::invalid_argument);
}

TEST(IntegrateStepTest, RestStaysAtRest) {
  Sampler s(22);
  const RigidBodyState st{s.rotation(), Vector3::Zero()};
  const RigidBodyState next = integrate_step(st, no_torque(), {}, kBody, 0.0, 1e-3);
  EXPECT_LT((next.r.matrix() - st.r.matrix()).norm(), 1e-15);
  EXPECT_EQ(next.omega, Vector3::Zero());
}

TEST(IntegrateStepTest, PrincipalAxisSpinMatchesClosedForm) {
  Sampler s(23);
  const Rotation r0 = s.rotation();
  RigidBodyState st{r0, Vector3(0, 0, 2)};
  const double h = 1e-3;
  for (int k = 1; k <= 5000; ++k) {
    st = integrate_step(st, no_torque(), {}, kBody, (k - 1) * h, h);
    if (k % 1000 == 0) {
      const Matrix3 expected = r0.matrix() * rotation_z(2.0 * k * h).matrix();
      EXPECT_LT((st.r.matrix() - expected).norm(), 1e-7) << "t = " << k * h;
    }
  }
  EXPECT_LT((st.omega - Vector3(0, 0, 2)).norm(), 1e-12);
}

TEST(IntegrateStepTest, TorqueFreeTumblingConservesInvariants) {
  Sampler s(24);
  RigidBodyState st{s.rotation(), Vector3(1.0, -0.5, 0.7)};
  const auto energy = [](const RigidBodyState& x) {
    return 0.5 * x.omega.dot(kBody.matrix() * x.omega);
  };
  const auto momentum = [](const RigidBodyState& x) {
    return (x.r.matrix() * kBody.matrix() * x.omega).eval();
  };
  const double e0 = energy(st);
  const Vector3 m0 = momentum(st);
  const double h = 1e-3;
  for (int k = 0; k < 10000; ++k) {
    st = integrate_step(st, no_torque(), {}, kBody, k * h, h);
    ASSERT_LT(st.r.orthonormality_error(), 1e-12);
    ASSERT_NEAR(st.r.matrix().determinant(), 1.0, 1e-12);
  }
  EXPECT_NEAR(energy(st), e0, 1e-8);
  EXPECT_LT((momentum(st) - m0).norm(), 1e-8);
}

// Terminal error of a 1 s torque-free run against an h = 1e-5 baseline.
double torque_free_error(double h, const RigidBodyState& baseline,
                         const RigidBodyState& start) {
  RigidBodyState st = start;
  const int n = static_cast<int>(std::lround(1.0 / h));
  for (int k = 0; k < n; ++k) st = integrate_step(st, no_torque(), {}, kBody, k * h, h);
  return std::sqrt((st.r.matrix() - baseline.r.matrix()).squaredNorm() +
                   (st.omega - baseline.omega).squaredNorm());
}

TEST(IntegrateStepTest, FourthOrderConvergence) {
  const RigidBodyState start{Rotation(), Vector3(1.0, 2.0, -1.5)};
  RigidBodyState baseline = start;
  for (int k = 0; k < 100000; ++k) {
    baseline = integrate_step(baseline, no_torque(), {}, kBody, k * 1e-5, 1e-5);
  }
  const double coarse = torque_free_error(2e-2, baseline, start);
  const double fine = torque_free_error(1e-2, baseline, start);
  EXPECT_GE(coarse / fine, 8.0) << coarse << " vs " << fine;
}

TEST(IntegrateStepTest, TorqueSampledAtEveryStage) {
  int calls = 0;
  const TorqueProvider counting = [&calls](double, const Matrix3&, const Vector3&) {
    ++calls;
    return Vector3::Zero().eval();
  };
  integrate_step(RigidBodyState{}, counting, {}, kBody, 0.0, 1e-3);
  EXPECT_EQ(calls, 4);
}

TEST(IntegrateStepTest, AugmentedStateIntegratesEstimateRate) {
  // Constant estimate rate c: the estimate advances by exactly c h.
  const Vector3 c(0.5, -1.0, 2.0);
  const ControlLaw law = [&c](double, const Matrix3&, const Vector3&, const Vector3&) {
    return ControlOutput{Vector3::Zero(), c};
  };
  const AugmentedState next = integrate_step(AugmentedState{}, law, {}, kBody, 0.0, 1e-2);
  EXPECT_LT((next.estimate - 1e-2 * c).norm(), 1e-15);
}

TEST(BenchmarkReferenceTest, InitialValue) {
  const ReferenceSample r0 = benchmark_reference(0.0);
  EXPECT_LT((r0.rd.matrix() - Matrix3::Identity()).norm(), 1e-15);
  EXPECT_LT((r0.omega_d - Vector3(2, 0, 1)).norm(), 1e-15);
}

TEST(BenchmarkReferenceTest, KinematicConsistency) {
  Sampler s(25);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double t = s.uniform(0.0, 30.0);
    const ReferenceSample ref = benchmark_reference(t);
    EXPECT_LT(ref.rd.orthonormality_error(), 1e-9);
    EXPECT_TRUE(ref.omega_d.allFinite());
    const Matrix3 rd_dot =
        (benchmark_reference(t + h).rd.matrix() - benchmark_reference(t - h).rd.matrix()) /
        (2.0 * h);
    EXPECT_LT((rd_dot - ref.rd.matrix() * hat(ref.omega_d)).norm(), 1e-7) << "t = " << t;
    const Vector3 omega_dot =
        (benchmark_reference(t + h).omega_d - benchmark_reference(t - h).omega_d) / (2.0 * h);
    EXPECT_LT((omega_dot - ref.omega_d_dot).norm(), 1e-7) << "t = " << t;
  }
}

TEST(ConstantReferenceTest, HoldsAttitude) {
  const ReferenceSample r = constant_reference(Rotation())(17.3);
  EXPECT_EQ(r.rd.matrix(), Matrix3::Identity());
  EXPECT_EQ(r.omega_d, Vector3::Zero());
  EXPECT_EQ(r.omega_d_dot, Vector3::Zero());
}

TEST(FixedAxisReferenceTest, KinematicConsistency) {
  Sampler s(26);
  const Rotation start = s.rotation();
  const Vector3 axis = s.unit3();
  const ReferenceProvider ref = fixed_axis_reference(start, axis, 0.7);
  const double t = 2.3;
  const double h = 1e-5;
  const ReferenceSample now = ref(t);
  const Matrix3 rd_dot = (ref(t + h).rd.matrix() - ref(t - h).rd.matrix()) / (2.0 * h);
  EXPECT_LT((rd_dot - now.rd.matrix() * hat(now.omega_d)).norm(), 1e-8);
  EXPECT_LT((now.omega_d - 0.7 * axis).norm(), 1e-15);
  EXPECT_LT((ref(0.0).rd.matrix() - start.matrix()).norm(), 1e-15);
}

TEST(DifferentiatedReferenceTest, RecoversAngularAcceleration) {
  const ReferenceProvider ref = differentiated_reference(
      [](double t) { return rotation_z(std::sin(t)); },
      [](double t) { return Vector3(0, 0, std::cos(t)); });
  for (double t : {0.0, 0.4, 2.0}) {
    EXPECT_NEAR(ref(t).omega_d_dot.z(), -std::sin(t), 1e-8);
  }
}

TEST(ReferenceBoundsTest, RejectsLargeOrNonFinite) {
  ReferenceSample sample;
  EXPECT_NO_THROW(check_reference_bounds(sample));
  sample.omega_d = Vector3(2e3, 0, 0);
  EXPECT_THROW(check_reference_bounds(sample), InvalidReference);
  EXPECT_NO_THROW(check_reference_bounds(sample, 1e4));
  sample.omega_d = Vector3::Zero();
  sample.omega_d_dot = Vector3(0, std::nan(""), 0);
  EXPECT_THROW(check_reference_bounds(sample), InvalidReference);
}

}  // namespace
}  // namespace so3track
