#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "nlsysid/learner.hpp"
#include "nlsysid/linalg.hpp"
#include "nlsysid/rng.hpp"
#include "nlsysid/simulator.hpp"

namespace nlsysid {
namespace {

ParamMatrix scalar(double v) { return ParamMatrix::Constant(1, 1, v); }
Vector vec1(double v) { return Vector::Constant(1, v); }

TEST(Dataset, SampleCountFromTrajectory) {
  Rng rng(1);
  const SystemParams params = random_system(2, 3, 0.5, rng);
  const Trajectory traj = simulate(params, gaussian_inputs(3, 11, rng));
  const RegressionDataset ds = build_dataset(traj, 0.7);
  EXPECT_EQ(ds.size(), 10);
  EXPECT_EQ(ds.n, 2);
  EXPECT_EQ(ds.p, 3);
  for (Eigen::Index k = 0; k < 10; ++k) {
    const Eigen::Index t = k + 1;
    EXPECT_EQ(ds.x.col(k).head(2), Vector(0.7 * traj.states.col(t)));
    EXPECT_EQ(ds.x.col(k).tail(3), Vector(traj.inputs.col(t)));
    EXPECT_EQ(ds.y.col(k), Vector(traj.states.col(t + 1)));
  }
}

TEST(Dataset, ZeroStatesGiveBareInputs) {
  SystemParams params{Matrix::Zero(2, 2), Matrix::Identity(2, 2), Activation::linear()};
  const Trajectory traj = simulate(params, Matrix::Zero(2, 6));
  const RegressionDataset ds = build_dataset(traj, 1.0);
  EXPECT_EQ(ds.x, Matrix::Zero(4, 5));
  EXPECT_THROW(build_dataset(simulate(params, Matrix::Zero(2, 1)), 1.0), std::invalid_argument);
}

TEST(Loss, HandExamples) {
  const auto ds = make_dataset(Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  EXPECT_DOUBLE_EQ(loss(scalar(0.0), ds, Activation::linear()), 0.5);
  const ParamMatrix g = grad_single(scalar(0.0), vec1(1.0), vec1(1.0), Activation::linear());
  EXPECT_DOUBLE_EQ(g(0, 0), -1.0);
}

TEST(Loss, ZeroAtTruthOnNoiselessData) {
  Rng rng(3);
  const SystemParams params = random_system(3, 4, 0.6, rng, Activation::leaky_relu(0.3));
  const Trajectory traj = simulate(params, gaussian_inputs(4, 50, rng));
  const RegressionDataset ds = build_dataset(traj, 0.8);
  const ParamMatrix truth = encode(params.a, params.b, 0.8);
  EXPECT_LT(loss(truth, ds, params.act), 1e-28);
  const ParamMatrix g = grad_single(truth, ds.x.col(3), ds.y.col(3), params.act);
  EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Loss, SeparatesAlongRows) {
  Rng rng(4);
  const Matrix x = gaussian_inputs(5, 30, rng);
  const Matrix y = gaussian_inputs(3, 30, rng);
  const ParamMatrix theta = gaussian_inputs(3, 5, rng);
  const auto ds = make_dataset(x, y);
  const auto act = Activation::leaky_relu(0.4);
  double total = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    total += loss(theta.row(i), make_dataset(x, y.row(i)), act);
  }
  EXPECT_NEAR(loss(theta, ds, act), total, 1e-12);
}

TEST(Sgd, HandIteration) {
  const auto ds = make_dataset(Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  LearnerConfig cfg;
  cfg.eta = 0.5;
  cfg.iterations = 2;
  std::vector<double> seen;
  sgd_run(ds, cfg, Activation::linear(), [&](long, const ParamMatrix& th) { seen.push_back(th(0, 0)); });
  EXPECT_EQ(seen, (std::vector<double>{0.0, 0.5, 0.75}));
}

TEST(Sgd, ZeroStepLeavesStartUntouched) {
  Rng rng(5);
  const auto ds = make_dataset(gaussian_inputs(4, 10, rng), gaussian_inputs(2, 10, rng));
  LearnerConfig cfg;
  cfg.eta = 0.0;
  cfg.iterations = 100;
  cfg.theta0 = ParamMatrix(gaussian_inputs(2, 4, rng));
  EXPECT_EQ(sgd_run(ds, cfg, Activation::relu()), *cfg.theta0);
}

TEST(Sgd, DeterministicTraces) {
  Rng rng(6);
  const SystemParams params = random_system(3, 4, 0.5, rng, Activation::leaky_relu(0.5));
  const Trajectory traj = simulate(params, gaussian_inputs(4, 80, rng));
  const RegressionDataset ds = build_dataset(traj, empirical_scaling(traj));
  const ParamMatrix truth = encode(params.a, params.b, ds.mu);
  LearnerConfig cfg;
  cfg.iterations = 2000;
  cfg.seed = 77;
  cfg.trace_stride = 300;
  const TrainTrace a = sgd_train(ds, cfg, params.act, truth);
  const TrainTrace b = sgd_train(ds, cfg, params.act, truth);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.normalized_error, b.normalized_error);
  EXPECT_EQ(a.iterations.back(), 2000);
  EXPECT_EQ(a.iterations[1], 300);
  EXPECT_EQ(a.normalized_error.back(), *a.final_error);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a);
  write_trace_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().rfind("iteration,normalized_error,normalized_loss\n", 0), 0u);
}

TEST(Sgd, RecoversLeakySystem) {
  Rng rng(7);
  const SystemParams params = random_system(3, 5, 0.5, rng, Activation::leaky_relu(0.5));
  const Trajectory traj = simulate(params, gaussian_inputs(5, 200, rng));
  const RegressionDataset ds = build_dataset(traj, empirical_scaling(traj));
  LearnerConfig cfg;
  cfg.eta = 0.02;
  cfg.iterations = 20000;
  cfg.seed = 1;
  const TrainTrace tr = sgd_train(ds, cfg, params.act, encode(params.a, params.b, ds.mu));
  EXPECT_LT(*tr.final_error, 1e-6);
  EXPECT_LT((tr.weights.a_hat - params.a).norm(), 1e-2);
  EXPECT_LT((tr.weights.b_hat - params.b).norm(), 1e-2);
}

TEST(Codec, HandDecode) {
  ParamMatrix theta(1, 2);
  theta << 2, 3;
  const DecodedWeights w = decode(theta, 0.5);
  EXPECT_EQ(w.a_hat, Matrix::Constant(1, 1, 1.0));
  EXPECT_EQ(w.b_hat, Matrix::Constant(1, 1, 3.0));
  EXPECT_EQ(decode(theta, 1.0).a_hat, Matrix::Constant(1, 1, 2.0));
}

TEST(Codec, RoundTrip) {
  Rng rng(8);
  const SystemParams params = random_system(4, 3, 0.9, rng);
  const DecodedWeights w = decode(encode(params.a, params.b, 0.25), 0.25);
  EXPECT_EQ(w.a_hat, params.a);
  EXPECT_EQ(w.b_hat, params.b);
}

TEST(Scaling, RatioOfCovarianceNorms) {
  Rng rng(9);
  const Matrix inputs = gaussian_inputs(3, 200000, rng);
  const Matrix states = 2.0 * gaussian_inputs(3, 200000, rng);
  EXPECT_NEAR(empirical_scaling(states, inputs), 0.5, 0.01);
  EXPECT_NEAR(empirical_scaling(inputs, gaussian_inputs(3, 200000, rng)), 1.0, 0.02);
}

TEST(Scaling, TrajectoryFormUsesSamplesOneToN) {
  Rng rng(10);
  const SystemParams params = random_system(2, 2, 0.5, rng);
  const Trajectory traj = simulate(params, gaussian_inputs(2, 40, rng));
  const Matrix h = traj.states.block(0, 1, 2, 39);
  const Matrix u = traj.inputs.block(0, 1, 2, 39);
  EXPECT_DOUBLE_EQ(empirical_scaling(traj), empirical_scaling(h, u));
}

TEST(MuMode, Selection) {
  Rng rng(11);
  const SystemParams params = random_system(2, 2, 0.5, rng);
  const Trajectory traj = simulate(params, gaussian_inputs(2, 40, rng));
  EXPECT_DOUBLE_EQ(select_mu(MuMode::explicit_value(0.3), traj, params), 0.3);
  EXPECT_DOUBLE_EQ(select_mu(MuMode::empirical(), traj, params), empirical_scaling(traj));
  const double b = spectral_norm(params.b);
  EXPECT_NEAR(select_mu(MuMode::theoretical(), traj, params), std::sqrt(0.75) / b, 1e-12);
  EXPECT_EQ(mu_mode_from_string("0.5").value, 0.5);
  EXPECT_THROW(mu_mode_from_string("-1"), std::invalid_argument);
  EXPECT_THROW(mu_mode_from_string("bogus"), std::invalid_argument);
}

TEST(Metrics, NormalizedError) {
  ParamMatrix c(2, 2);
  c << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(normalized_error(c, c), 0.0);
  EXPECT_DOUBLE_EQ(normalized_error(ParamMatrix::Zero(2, 2), c), 1.0);
  EXPECT_DOUBLE_EQ(normalized_error(2 * c, c), 1.0);
  EXPECT_THROW(normalized_error(c, ParamMatrix::Zero(2, 2)), std::invalid_argument);
}

TEST(Metrics, NormalizedLoss) {
  const auto ds = make_dataset(Matrix::Ones(1, 1), Matrix::Constant(1, 1, 2.0));
  EXPECT_DOUBLE_EQ(normalized_loss(scalar(1.0), ds, Activation::linear()), 0.25);
  EXPECT_DOUBLE_EQ(normalized_loss(scalar(0.0), ds, Activation::relu()), 1.0);
  EXPECT_THROW(normalized_loss(scalar(1.0), make_dataset(Matrix::Ones(1, 1), Matrix::Zero(1, 1)),
                               Activation::linear()),
               std::invalid_argument);
}

}  // namespace
}  // namespace nlsysid
