#include <cmath>

#include <gtest/gtest.h>

#include "nlsysid/linalg.hpp"
#include "nlsysid/rng.hpp"
#include "nlsysid/simulator.hpp"
#include "nlsysid/theory.hpp"

namespace nlsysid {
namespace {

Matrix row(std::initializer_list<double> values) {
  Matrix m(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index j = 0;
  for (double v : values) m(0, j++) = v;
  return m;
}

TEST(Simulator, ReluTwoSteps) {
  SystemParams params{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0), Activation::relu()};
  const Trajectory traj = simulate(params, row({-1.0, 2.0}));
  ASSERT_EQ(traj.states.cols(), 3);
  EXPECT_DOUBLE_EQ(traj.states(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(traj.states(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(traj.states(0, 2), 2.0);
}

TEST(Simulator, MemorylessIdentity) {
  SystemParams params{Matrix::Zero(3, 3), Matrix::Identity(3, 3), Activation::linear()};
  Rng rng(3);
  const Matrix inputs = gaussian_inputs(3, 20, rng);
  const Trajectory traj = simulate(params, inputs);
  for (Eigen::Index t = 0; t < 20; ++t) EXPECT_EQ(traj.states.col(t + 1), inputs.col(t));
}

TEST(Simulator, ZeroInputsStayAtOrigin) {
  Rng rng(5);
  const SystemParams params = random_system(4, 3, 0.9, rng, Activation::leaky_relu(0.3));
  const Trajectory traj = simulate(params, Matrix::Zero(3, 30));
  EXPECT_EQ(traj.states.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulator, RecursionHoldsAtEveryStep) {
  Rng rng(9);
  const SystemParams params = random_system(4, 6, 0.7, rng, Activation::leaky_relu(0.5));
  const Matrix inputs = gaussian_inputs(6, 25, rng);
  const Trajectory traj = simulate(params, inputs);
  ASSERT_EQ(traj.states.cols(), inputs.cols() + 1);
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    Vector pre = params.a * traj.states.col(t) + params.b * inputs.col(t);
    for (Eigen::Index i = 0; i < pre.size(); ++i) pre(i) = pre(i) >= 0 ? pre(i) : 0.5 * pre(i);
    EXPECT_LT((traj.states.col(t + 1) - pre).norm(), 1e-12);
  }
}

TEST(Simulator, RejectsMismatchedShapes) {
  SystemParams params{Matrix::Zero(2, 2), Matrix::Identity(2, 3), Activation::linear()};
  EXPECT_THROW(simulate(params, Matrix::Zero(2, 5)), std::invalid_argument);
  EXPECT_THROW(simulate(params, Matrix::Zero(3, 5), Vector::Zero(3)), std::invalid_argument);
  SystemParams bad{Matrix::Zero(2, 3), Matrix::Identity(2, 3), Activation::linear()};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Simulator, NonzeroInitialStateIsFlagged) {
  SystemParams params{Matrix::Zero(1, 1), Matrix::Identity(1, 1), Activation::linear()};
  EXPECT_FALSE(simulate(params, row({1.0})).nonzero_initial_state);
  EXPECT_TRUE(simulate(params, row({1.0}), Vector::Ones(1)).nonzero_initial_state);
}

TEST(GaussianInputs, DeterministicPerSeed) {
  Rng a(42), b(42);
  EXPECT_EQ(gaussian_inputs(3, 50, a), gaussian_inputs(3, 50, b));
}

TEST(GaussianInputs, MomentsMatchStandardNormal) {
  Rng rng(1);
  const Matrix scalar = gaussian_inputs(1, 100000, rng);
  EXPECT_LT(std::abs(scalar.mean()), 4.0 / std::sqrt(100000.0));
  const Matrix pair = gaussian_inputs(2, 100000, rng);
  const Matrix cov = pair * pair.transpose() / 100000.0;
  EXPECT_LT(spectral_norm(cov - Matrix::Identity(2, 2)), 0.05);
}

TEST(RandomSystem, SingularValuesOfAEqualTarget) {
  Rng rng(2);
  const SystemParams params = random_system(50, 100, 0.5, rng);
  const Eigen::JacobiSVD<Matrix> svd(params.a);
  for (Eigen::Index i = 0; i < 50; ++i) EXPECT_NEAR(svd.singularValues()(i), 0.5, 1e-10);
  EXPECT_EQ(params.b.rows(), 50);
  EXPECT_EQ(params.b.cols(), 100);
}

TEST(RandomSystem, ZeroNormGivesZeroMatrix) {
  Rng rng(2);
  EXPECT_EQ(random_system(4, 4, 0.0, rng).a, Matrix::Zero(4, 4));
}

TEST(RandomSystem, OrthogonalFactorIsOrthogonal) {
  Rng rng(8);
  const Matrix q = random_orthogonal(7, rng);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(7, 7)).norm(), 1e-12);
}

TEST(Truncation, ShortHistoryIsExact) {
  Rng rng(4);
  const SystemParams params = random_system(3, 2, 0.8, rng, Activation::leaky_relu(0.5));
  const Matrix inputs = gaussian_inputs(2, 20, rng);
  const Trajectory traj = simulate(params, inputs);
  for (Eigen::Index t = 0; t <= 6; ++t) EXPECT_EQ(truncated_state(params, inputs, t, 6), traj.states.col(t));
}

TEST(Truncation, WindowOneKeepsLastInput) {
  Rng rng(4);
  const SystemParams params = random_system(3, 2, 0.8, rng, Activation::relu());
  const Matrix inputs = gaussian_inputs(2, 20, rng);
  for (Eigen::Index t = 1; t <= 20; ++t) {
    const Vector expected = params.act.eval(Vector(params.b * inputs.col(t - 1)));
    EXPECT_EQ(truncated_state(params, inputs, t, 1), expected);
    EXPECT_EQ(truncated_state(params, inputs, t, 0), Vector::Zero(3));
  }
}

TEST(Truncation, IgnoresInputsOutsideWindow) {
  Rng rng(6);
  const SystemParams params = random_system(3, 2, 0.9, rng, Activation::leaky_relu(0.2));
  Matrix inputs = gaussian_inputs(2, 30, rng);
  const Vector before = truncated_state(params, inputs, 25, 5);
  inputs.leftCols(20).setConstant(100.0);
  inputs.col(25).setConstant(-7.0);
  EXPECT_EQ(truncated_state(params, inputs, 25, 5), before);
}

TEST(Subsample, IndexFormula) {
  SystemParams params{Matrix::Zero(1, 1), Matrix::Identity(1, 1), Activation::linear()};
  Rng rng(1);
  const Trajectory traj = simulate(params, gaussian_inputs(1, 11, rng));
  ASSERT_EQ(traj.last_sample_index(), 10);
  EXPECT_EQ(subsample(traj, 3, 2).times, (std::vector<Eigen::Index>{2, 5, 8}));
  EXPECT_EQ(subsample(traj, 3, 3).times, (std::vector<Eigen::Index>{3, 6, 9}));
  const SubTrajectory full = subsample(traj, 1, 1);
  ASSERT_EQ(full.times.size(), 10u);
  EXPECT_EQ(full.states, traj.states.block(0, 1, 1, 10));
  EXPECT_EQ(full.inputs, traj.inputs.block(0, 1, 1, 10));
  EXPECT_THROW(subsample(traj, 3, 0), std::invalid_argument);
}

TEST(MultiTrajectory, OneStepIsInputImage) {
  Rng rng(12);
  const SystemParams params = random_system(2, 3, 1.5, rng, Activation::linear());
  const MultiTrajectorySample s = multi_trajectory_sample(params, 20, 1, 99);
  for (Eigen::Index i = 0; i < 20; ++i) {
    Rng stream = Rng::stream(99, {stream_tag::kTrajectory, static_cast<std::uint64_t>(i)});
    const Vector u0 = gaussian_inputs(3, 2, stream).col(0);
    EXPECT_LT((s.states.col(i) - params.b * u0).norm(), 1e-12);
    EXPECT_LT((s.next_states.col(i) - (params.a * s.states.col(i) + params.b * s.inputs.col(i))).norm(), 1e-12);
  }
}

TEST(MultiTrajectory, DeterministicPerSeed) {
  Rng rng(12);
  const SystemParams params = random_system(2, 3, 1.2, rng, Activation::leaky_relu(0.5));
  const auto a = multi_trajectory_sample(params, 50, 3, 5);
  const auto b = multi_trajectory_sample(params, 50, 3, 5);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.next_states, b.next_states);
}

TEST(MultiTrajectory, MemorylessSamplesAreStandardNormal) {
  SystemParams params{Matrix::Zero(2, 2), Matrix::Identity(2, 2), Activation::linear()};
  const auto s = multi_trajectory_sample(params, 1000, 3, 17);
  EXPECT_LT(spectral_norm(empirical_covariance(s.states) - Matrix::Identity(2, 2)), 0.2);
}

TEST(Properties, InputPerturbationStaysBounded) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemParams params = random_system(4, 5, 0.3 + 0.03 * trial, rng, Activation::leaky_relu(0.4));
    const Matrix inputs = gaussian_inputs(5, 40, rng);
    Matrix perturbed = inputs;
    const Eigen::Index tau = 10;
    perturbed.col(tau) += gaussian_inputs(5, 1, rng);
    const Trajectory a = simulate(params, inputs);
    const Trajectory b = simulate(params, perturbed);
    const double a_norm = spectral_norm(params.a);
    const double bu = spectral_norm(params.b) * (perturbed.col(tau) - inputs.col(tau)).norm();
    for (Eigen::Index t = 0; t <= tau; ++t) EXPECT_EQ(a.states.col(t), b.states.col(t));
    for (Eigen::Index t = tau; t < 40; ++t) {
      EXPECT_LE((a.states.col(t + 1) - b.states.col(t + 1)).norm(), std::pow(a_norm, t - tau) * bu + 1e-12);
    }
  }
}

TEST(Properties, StateNormGrowthBounded) {
  Rng rng(22);
  const SystemParams params = random_system(3, 3, 0.6, rng, Activation::relu());
  const Matrix inputs = gaussian_inputs(3, 50, rng);
  const Trajectory traj = simulate(params, inputs);
  const double a_norm = spectral_norm(params.a);
  const double b_norm = spectral_norm(params.b);
  for (Eigen::Index t = 0; t < 50; ++t) {
    EXPECT_LE(traj.states.col(t + 1).norm(),
              a_norm * traj.states.col(t).norm() + b_norm * inputs.col(t).norm() + 1e-12);
  }
}

}  // namespace
}  // namespace nlsysid
