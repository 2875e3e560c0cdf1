#include "nlsysid/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nlsysid/rng.hpp"
#include "nlsysid/theory.hpp"

namespace nlsysid {

namespace {

constexpr double kDeterministicTolerance = 1e-9;

}  // namespace

void CheckReport::add(double observed_value, double bound_value) {
  observed.push_back(observed_value);
  bound.push_back(bound_value);
}

void CheckReport::finalize() {
  pass = true;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(observed[i] <= bound[i] + tolerance)) pass = false;
  }
}

nlohmann::json to_json(const CheckReport& r) {
  return {{"name", r.name},         {"observed", r.observed},
          {"bound", r.bound},       {"tolerance", r.tolerance},
          {"pass", r.pass},         {"samples_used", r.samples_used},
          {"detail", r.detail}};
}

ParamMatrix finite_diff_grad(const ParamMatrix& theta, const Vector& x, const Vector& y,
                             const Activation& act, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  ParamMatrix g(theta.rows(), theta.cols());
  ParamMatrix probe = theta;
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
      probe(i, j) = theta(i, j) + step;
      const double up = sample_loss(probe, x, y, act);
      probe(i, j) = theta(i, j) - step;
      const double down = sample_loss(probe, x, y, act);
      probe(i, j) = theta(i, j);
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

CheckReport check_truncation(const SystemParams& params, const Matrix& inputs, Eigen::Index window) {
  CheckReport rep;
  rep.name = "truncation";
  rep.tolerance = kDeterministicTolerance;
  const Trajectory traj = simulate(params, inputs);
  const double a_norm = spectral_norm(params.a);
  const double decay = std::pow(a_norm, static_cast<double>(window));
  for (Eigen::Index t = 0; t < traj.states.cols(); ++t) {
    const Vector truncated = truncated_state(params, inputs, t, window);
    const double diff = (traj.states.col(t) - truncated).norm();
    const double bound = t <= window ? 0.0 : decay * traj.states.col(t - window).norm();
    rep.add(diff, bound);
  }
  rep.samples_used = static_cast<long>(traj.states.cols());
  rep.finalize();
  return rep;
}

CheckReport check_lipschitz_input(const SystemParams& params, const Matrix& inputs, Eigen::Index tau,
                                  const Vector& delta) {
  if (tau < 0 || tau >= inputs.cols()) throw std::invalid_argument("check_lipschitz_input: tau out of range");
  CheckReport rep;
  rep.name = "lipschitz_input";
  rep.tolerance = kDeterministicTolerance;
  Matrix perturbed = inputs;
  perturbed.col(tau) += delta;
  const Trajectory base = simulate(params, inputs);
  const Trajectory moved = simulate(params, perturbed);
  const double a_norm = spectral_norm(params.a);
  const double scale = spectral_norm(params.b) * delta.norm();
  for (Eigen::Index s = 0; s < base.states.cols(); ++s) {
    const double diff = (base.states.col(s) - moved.states.col(s)).norm();
    // h_s with s = t+1 depends on u_τ only for t ≥ τ.
    const double bound = s <= tau ? 0.0 : std::pow(a_norm, static_cast<double>(s - 1 - tau)) * scale;
    rep.add(diff, bound);
  }
  rep.samples_used = static_cast<long>(base.states.cols());
  rep.finalize();
  return rep;
}

CheckReport check_independence_structure(const SystemParams& params, Eigen::Index rate,
                                         Eigen::Index offset, int trials, std::uint64_t seed,
                                         Eigen::Index horizon) {
  if (rate < 2) throw std::invalid_argument("check_independence_structure: L must be at least 2");
  if (offset < 1 || offset > rate) throw std::invalid_argument("check_independence_structure: need 1 <= tau <= L");
  params.validate();
  if (horizon <= 0) horizon = 6 * rate + offset;
  CheckReport rep;
  rep.name = "independence_structure";
  rep.tolerance = 0.0;
  const Eigen::Index p = params.p();
  const Eigen::Index window = rate - 1;

  std::vector<Eigen::Index> times;
  for (Eigen::Index t = offset; t <= horizon; t += rate) times.push_back(t);

  std::vector<double> worst(times.size(), 0.0);
  double worst_aligned = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, {stream_tag::kCheck, static_cast<std::uint64_t>(trial)});
    const Matrix inputs = gaussian_inputs(p, horizon + 1, rng);
    std::vector<Vector> truncated;
    for (Eigen::Index t : times) truncated.push_back(truncated_state(params, inputs, t, window));

    for (std::size_t i = 0; i < times.size(); ++i) {
      const Eigen::Index t = times[i];
      const Eigen::Index lo = std::max<Eigen::Index>(0, t - window);
      Matrix fresh = gaussian_inputs(p, horizon + 1, rng);
      if (t > lo) fresh.middleCols(lo, t - lo) = inputs.middleCols(lo, t - lo);
      const Vector again = truncated_state(params, fresh, t, window);
      worst[i] = std::max(worst[i], (again - truncated[i]).cwiseAbs().maxCoeff());
    }

    Matrix aligned = inputs;
    for (Eigen::Index t = offset % rate; t <= horizon; t += rate) {
      for (Eigen::Index k = 0; k < p; ++k) aligned(k, t) = rng.normal();
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      const Vector again = truncated_state(params, aligned, times[i], window);
      worst_aligned = std::max(worst_aligned, (again - truncated[i]).cwiseAbs().maxCoeff());
    }
  }
  for (double w : worst) rep.add(w, 0.0);
  rep.add(worst_aligned, 0.0);
  rep.samples_used = static_cast<long>(trials) * static_cast<long>(times.size());
  std::ostringstream os;
  os << "L=" << rate << " tau=" << offset << " samples per trial=" << times.size()
     << "; last entry is the redraw of inputs at timestamps = tau mod L";
  rep.detail = os.str();
  rep.finalize();
  return rep;
}

SingleRowProblem make_single_row_problem(Eigen::Index dim, Eigen::Index count, const Activation& act,
                                         std::uint64_t seed) {
  if (dim < 1 || count < 1) throw std::invalid_argument("make_single_row_problem: empty problem");
  Rng rng = Rng::stream(seed, {stream_tag::kInputs});
  SingleRowProblem prob;
  prob.act = act;
  prob.x = gaussian_inputs(dim, count, rng);
  prob.theta_star = gaussian_inputs(dim, 1, rng).col(0);
  prob.theta0 = Vector::Zero(dim);
  prob.y.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) prob.y(i) = act.eval(prob.x.col(i).dot(prob.theta_star));
  return prob;
}

DesignBounds measure_design(const Matrix& x) {
  const Matrix gram = x * x.transpose() / static_cast<double>(x.cols());
  const auto ext = symmetric_extremes(0.5 * (gram + gram.transpose()));
  return {ext.max, ext.min, x.colwise().squaredNorm().maxCoeff()};
}

CheckReport check_rate_bound(const SingleRowProblem& problem, int runs,
                             const std::vector<long>& checkpoints, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "rate_bound";
  rep.tolerance = 0.0;
  const double beta = problem.act.min_slope();
  const DesignBounds design = measure_design(problem.x);
  std::ostringstream os;
  os << "gamma_plus=" << design.gamma_plus << " gamma_minus=" << design.gamma_minus
     << " B=" << design.row_bound;

  bool noiseless = problem.y.size() == problem.x.cols();
  for (Eigen::Index i = 0; noiseless && i < problem.x.cols(); ++i) {
    noiseless = problem.y(i) == problem.act.eval(problem.x.col(i).dot(problem.theta_star));
  }
  if (!(beta > 0.0) || !(design.gamma_minus > 0.0) || !noiseless || runs < 1 || checkpoints.empty()) {
    rep.detail = "precondition violated: need beta > 0, positive definite design, noiseless outputs, runs >= 1; " + os.str();
    rep.pass = false;
    return rep;
  }

  const double eta = beta * beta * design.gamma_minus / (design.gamma_plus * design.row_bound);
  const double factor =
      1.0 - std::pow(beta, 4) * design.gamma_minus * design.gamma_minus / (design.gamma_plus * design.row_bound);
  os << " eta=" << eta << " factor=" << factor;
  rep.detail = os.str();

  const RegressionDataset ds = make_dataset(problem.x, Matrix(problem.y.transpose()));
  const long last = *std::max_element(checkpoints.begin(), checkpoints.end());
  std::vector<double> mean_sq(checkpoints.size(), 0.0);
  for (int run = 0; run < runs; ++run) {
    LearnerConfig cfg;
    cfg.eta = eta;
    cfg.iterations = last;
    cfg.theta0 = ParamMatrix(problem.theta0.transpose());
    cfg.seed = Rng::stream(seed, {stream_tag::kSgd, static_cast<std::uint64_t>(run)}).engine()();
    sgd_run(ds, cfg, problem.act, [&](long tau, const ParamMatrix& theta) {
      for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        if (checkpoints[k] == tau) mean_sq[k] += (theta.row(0).transpose() - problem.theta_star).squaredNorm();
      }
    });
  }
  const double initial = (problem.theta0 - problem.theta_star).squaredNorm();
  const double slack = 1.0 + 3.0 / std::sqrt(static_cast<double>(runs));
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    rep.add(mean_sq[k] / runs, initial * std::pow(factor, static_cast<double>(checkpoints[k])) * slack);
  }
  rep.samples_used = runs;
  rep.finalize();
  return rep;
}

}  // namespace nlsysid
