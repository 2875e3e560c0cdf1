#include "nlsysid/learner.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nlsysid/rng.hpp"
#include "nlsysid/theory.hpp"

namespace nlsysid {

namespace {

void check_shapes(const ParamMatrix& theta, const RegressionDataset& ds) {
  if (theta.rows() != ds.y.rows() || theta.cols() != ds.x.rows()) {
    throw std::invalid_argument("parameter matrix is " + std::to_string(theta.rows()) + "x" +
                                std::to_string(theta.cols()) + ", dataset expects " +
                                std::to_string(ds.y.rows()) + "x" + std::to_string(ds.x.rows()));
  }
}

Matrix apply(const Activation& act, Matrix z) {
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = act.eval(z(i, j));
  }
  return z;
}

Matrix stack_regressors(const Matrix& states, const Matrix& inputs, double mu) {
  Matrix x(states.rows() + inputs.rows(), states.cols());
  x.topRows(states.rows()) = mu * states;
  x.bottomRows(inputs.rows()) = inputs;
  return x;
}

}  // namespace

RegressionDataset build_dataset(const Trajectory& traj, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("build_dataset: mu must be positive");
  const Eigen::Index count = traj.last_sample_index();
  if (count < 1) throw std::invalid_argument("build_dataset: trajectory too short for one sample");
  RegressionDataset ds;
  ds.n = traj.states.rows();
  ds.p = traj.inputs.rows();
  ds.mu = mu;
  ds.x = stack_regressors(traj.states.middleCols(1, count), traj.inputs.middleCols(1, count), mu);
  ds.y = traj.states.middleCols(2, count);
  return ds;
}

RegressionDataset build_dataset(const MultiTrajectorySample& sample, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("build_dataset: mu must be positive");
  RegressionDataset ds;
  ds.n = sample.states.rows();
  ds.p = sample.inputs.rows();
  ds.mu = mu;
  ds.x = stack_regressors(sample.states, sample.inputs, mu);
  ds.y = sample.next_states;
  return ds;
}

RegressionDataset make_dataset(Matrix x, Matrix y) {
  if (x.cols() != y.cols() || x.cols() == 0 || y.rows() == 0 || x.rows() < y.rows()) {
    throw std::invalid_argument("make_dataset: x and y must hold the same nonzero number of samples");
  }
  RegressionDataset ds;
  ds.n = y.rows();
  ds.p = x.rows() - y.rows();
  ds.x = std::move(x);
  ds.y = std::move(y);
  return ds;
}

ParamMatrix encode(const Matrix& a, const Matrix& b, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("encode: mu must be positive");
  if (a.rows() != a.cols() || b.rows() != a.rows()) throw std::invalid_argument("encode: shape mismatch");
  ParamMatrix c(a.rows(), a.cols() + b.cols());
  c.leftCols(a.cols()) = a / mu;
  c.rightCols(b.cols()) = b;
  return c;
}

DecodedWeights decode(const ParamMatrix& theta, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("decode: mu must be positive");
  const Eigen::Index n = theta.rows();
  if (theta.cols() < n) throw std::invalid_argument("decode: theta needs at least n columns");
  return {mu * Matrix(theta.leftCols(n)), Matrix(theta.rightCols(theta.cols() - n))};
}

double sample_loss(const ParamMatrix& theta, const Vector& x, const Vector& y, const Activation& act) {
  if (theta.cols() != x.size() || theta.rows() != y.size()) {
    throw std::invalid_argument("sample_loss: shape mismatch");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    const double r = y(i) - act.eval(theta.row(i).dot(x));
    s += r * r;
  }
  return 0.5 * s;
}

double loss(const ParamMatrix& theta, const RegressionDataset& ds, const Activation& act) {
  check_shapes(theta, ds);
  const Matrix resid = ds.y - apply(act, theta * ds.x);
  return 0.5 * resid.squaredNorm() / static_cast<double>(ds.size());
}

ParamMatrix grad_single(const ParamMatrix& theta, const Vector& x, const Vector& y,
                        const Activation& act) {
  if (theta.cols() != x.size() || theta.rows() != y.size()) {
    throw std::invalid_argument("grad_single: shape mismatch");
  }
  ParamMatrix g(theta.rows(), theta.cols());
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    const double z = theta.row(i).dot(x);
    g.row(i) = ((act.eval(z) - y(i)) * act.deriv(z)) * x.transpose();
  }
  return g;
}

double empirical_scaling(const Matrix& states, const Matrix& inputs) {
  const double sh = spectral_norm(empirical_covariance(states));
  const double su = spectral_norm(empirical_covariance(inputs));
  if (!(sh > 0.0)) throw std::invalid_argument("empirical_scaling: state covariance is zero");
  return std::sqrt(su / sh);
}

double empirical_scaling(const Trajectory& traj) {
  const Eigen::Index count = traj.last_sample_index();
  if (count < 2) throw std::invalid_argument("empirical_scaling: need at least 2 samples");
  return empirical_scaling(Matrix(traj.states.middleCols(1, count)),
                           Matrix(traj.inputs.middleCols(1, count)));
}

MuMode mu_mode_from_string(const std::string& s) {
  if (s == "theoretical") return MuMode::theoretical();
  if (s == "empirical") return MuMode::empirical();
  double v = 0.0;
  try {
    v = std::stod(s);
  } catch (const std::exception&) {
    throw std::invalid_argument("mu mode must be theoretical, empirical or a number: " + s);
  }
  if (!(v > 0.0)) throw std::invalid_argument("explicit mu must be positive");
  return MuMode::explicit_value(v);
}

std::string to_string(const MuMode& m) {
  switch (m.kind) {
    case MuMode::Kind::Theoretical:
      return "theoretical";
    case MuMode::Kind::Empirical:
      return "empirical";
    case MuMode::Kind::Explicit: {
      std::ostringstream os;
      os << std::setprecision(17) << m.value;
      return os.str();
    }
  }
  return "empirical";
}

double select_mu(const MuMode& mode, const Trajectory& traj, const SystemParams& params) {
  switch (mode.kind) {
    case MuMode::Kind::Empirical:
      return empirical_scaling(traj);
    case MuMode::Kind::Theoretical:
      return 1.0 / b_inf(spectral_norm(params.a), spectral_norm(params.b));
    case MuMode::Kind::Explicit:
      if (!(mode.value > 0.0)) throw std::invalid_argument("explicit mu must be positive");
      return mode.value;
  }
  return 1.0;
}

void LearnerConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("learning rate must be finite and >= 0");
  if (iterations < 0) throw std::invalid_argument("iterations must be nonnegative");
  if (trace_stride < 1) throw std::invalid_argument("trace_stride must be positive");
}

double normalized_error(const ParamMatrix& theta_hat, const ParamMatrix& truth) {
  if (theta_hat.rows() != truth.rows() || theta_hat.cols() != truth.cols()) {
    throw std::invalid_argument("normalized_error: shape mismatch");
  }
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("normalized_error: ground truth is zero");
  return (theta_hat - truth).squaredNorm() / denom;
}

double normalized_loss(const ParamMatrix& theta_hat, const RegressionDataset& ds, const Activation& act) {
  check_shapes(theta_hat, ds);
  const double denom = ds.y.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("normalized_loss: all outputs are zero");
  return (ds.y - apply(act, theta_hat * ds.x)).squaredNorm() / denom;
}

ParamMatrix sgd_run(const RegressionDataset& ds, const LearnerConfig& cfg, const Activation& act,
                    const IterateObserver& observe) {
  cfg.validate();
  const Eigen::Index count = ds.size();
  if (count < 1) throw std::invalid_argument("sgd_run: empty dataset");
  ParamMatrix theta = cfg.theta0 ? *cfg.theta0 : ParamMatrix::Zero(ds.y.rows(), ds.x.rows());
  check_shapes(theta, ds);

  Rng rng(cfg.seed);
  if (observe) observe(0, theta);
  const Eigen::Index rows = theta.rows();
  for (long tau = 1; tau <= cfg.iterations; ++tau) {
    const auto r = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(count)));
    const auto x = ds.x.col(r);
    // Rows are updated independently; the loss separates along them.
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double z = theta.row(i).dot(x);
      const double g = (act.eval(z) - ds.y(i, r)) * act.deriv(z);
      if (g != 0.0) theta.row(i).noalias() -= (cfg.eta * g) * x.transpose();
    }
    if (observe) observe(tau, theta);
  }
  return theta;
}

TrainTrace sgd_train(const RegressionDataset& ds, const LearnerConfig& cfg, const Activation& act,
                     const std::optional<ParamMatrix>& truth) {
  if (truth) check_shapes(*truth, ds);
  TrainTrace trace;
  const long stride = cfg.trace_stride;
  auto record = [&](long iteration, const ParamMatrix& theta) {
    if (iteration % stride != 0 && iteration != cfg.iterations) return;
    trace.iterations.push_back(iteration);
    if (truth) trace.normalized_error.push_back(normalized_error(theta, *truth));
    trace.normalized_loss.push_back(normalized_loss(theta, ds, act));
  };
  trace.theta = sgd_run(ds, cfg, act, record);
  if (truth) trace.final_error = normalized_error(trace.theta, *truth);
  trace.final_loss = normalized_loss(trace.theta, ds, act);
  if (trace.theta.cols() >= trace.theta.rows()) trace.weights = decode(trace.theta, ds.mu);
  return trace;
}

void write_trace_csv(std::ostream& os, const TrainTrace& trace) {
  os << "iteration,normalized_error,normalized_loss\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < trace.iterations.size(); ++k) {
    os << trace.iterations[k] << ',';
    if (k < trace.normalized_error.size()) os << trace.normalized_error[k];
    os << ',' << trace.normalized_loss[k] << '\n';
  }
}

nlohmann::json weights_to_json(const DecodedWeights& w, double mu) {
  auto rows_of = [](const Matrix& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      out.push_back(std::move(row));
    }
    return out;
  };
  return {{"mu", mu}, {"A_hat", rows_of(w.a_hat)}, {"B_hat", rows_of(w.b_hat)}};
}

}  // namespace nlsysid
