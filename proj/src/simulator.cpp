#include "nlsysid/simulator.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>

namespace nlsysid {

void SystemParams::validate() const {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw std::invalid_argument("SystemParams: A must be a nonempty square matrix");
  }
  if (b.rows() != a.rows() || b.cols() == 0) {
    throw std::invalid_argument("SystemParams: B must have n rows and at least one column");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("SystemParams: non-finite weights");
  }
}

Vector step(const SystemParams& params, const Vector& h, const Vector& u) {
  Vector pre = params.a * h;
  pre.noalias() += params.b * u;
  return params.act.eval(pre);
}

Trajectory simulate(const SystemParams& params, const Matrix& inputs) {
  return simulate(params, inputs, Vector::Zero(params.n()));
}

Trajectory simulate(const SystemParams& params, const Matrix& inputs, const Vector& h0) {
  params.validate();
  if (inputs.rows() != params.p()) {
    throw std::invalid_argument("simulate: inputs have " + std::to_string(inputs.rows()) +
                                " rows, expected p = " + std::to_string(params.p()));
  }
  if (h0.size() != params.n()) {
    throw std::invalid_argument("simulate: h0 has length " + std::to_string(h0.size()) +
                                ", expected n = " + std::to_string(params.n()));
  }
  Trajectory traj;
  traj.inputs = inputs;
  traj.states.resize(params.n(), inputs.cols() + 1);
  traj.states.col(0) = h0;
  traj.nonzero_initial_state = !h0.isZero(0.0);
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    traj.states.col(t + 1) = step(params, traj.states.col(t), inputs.col(t));
  }
  return traj;
}

Matrix gaussian_inputs(Eigen::Index p, Eigen::Index count, Rng& rng) {
  if (p < 1 || count < 1) throw std::invalid_argument("gaussian_inputs: p and count must be positive");
  Matrix u(p, count);
  for (Eigen::Index t = 0; t < count; ++t) {
    for (Eigen::Index i = 0; i < p; ++i) u(i, t) = rng.normal();
  }
  return u;
}

Matrix random_orthogonal(Eigen::Index n, Rng& rng) {
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

SystemParams random_system(Eigen::Index n, Eigen::Index p, double target_spectral_norm, Rng& rng,
                           const Activation& act) {
  if (n < 1 || p < 1) throw std::invalid_argument("random_system: n and p must be positive");
  if (!(target_spectral_norm >= 0.0)) {
    throw std::invalid_argument("random_system: target spectral norm must be nonnegative");
  }
  SystemParams params;
  params.a = target_spectral_norm * random_orthogonal(n, rng);
  params.b.resize(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) params.b(i, j) = rng.normal();
  }
  params.act = act;
  return params;
}

Vector truncated_state(const SystemParams& params, const Matrix& inputs, Eigen::Index t,
                       Eigen::Index window) {
  if (t < 0 || t > inputs.cols()) {
    throw std::invalid_argument("truncated_state: t must lie in [0, number of inputs]");
  }
  if (window < 0) throw std::invalid_argument("truncated_state: window must be nonnegative");
  // Zeroed inputs keep the auxiliary state at exactly zero, so start at t−L.
  Vector q = Vector::Zero(params.n());
  for (Eigen::Index tau = std::max<Eigen::Index>(0, t - window); tau < t; ++tau) {
    q = step(params, q, inputs.col(tau));
  }
  return q;
}

SubTrajectory subsample(const Trajectory& traj, Eigen::Index rate, Eigen::Index offset) {
  if (rate < 1 || offset < 1 || offset > rate) {
    throw std::invalid_argument("subsample: need rate >= 1 and 1 <= offset <= rate");
  }
  SubTrajectory sub;
  const Eigen::Index last = traj.last_sample_index();
  for (Eigen::Index t = offset; t <= last; t += rate) sub.times.push_back(t);
  const auto count = static_cast<Eigen::Index>(sub.times.size());
  sub.states.resize(traj.states.rows(), count);
  sub.inputs.resize(traj.inputs.rows(), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    sub.states.col(i) = traj.states.col(sub.times[i]);
    sub.inputs.col(i) = traj.inputs.col(sub.times[i]);
  }
  return sub;
}

MultiTrajectorySample multi_trajectory_sample(const SystemParams& params, Eigen::Index count,
                                              Eigen::Index t0, std::uint64_t seed) {
  params.validate();
  if (count < 1 || t0 < 1) {
    throw std::invalid_argument("multi_trajectory_sample: need N >= 1 and T0 >= 1");
  }
  MultiTrajectorySample out;
  out.next_states.resize(params.n(), count);
  out.states.resize(params.n(), count);
  out.inputs.resize(params.p(), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, {stream_tag::kTrajectory, static_cast<std::uint64_t>(i)});
    const Matrix u = gaussian_inputs(params.p(), t0 + 1, rng);
    const Trajectory traj = simulate(params, u);
    out.next_states.col(i) = traj.states.col(t0 + 1);
    out.states.col(i) = traj.states.col(t0);
    out.inputs.col(i) = u.col(t0);
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index p = traj.inputs.rows();
  const Eigen::Index n = traj.states.rows();
  os << "t";
  for (Eigen::Index i = 0; i < p; ++i) os << ",u" << i;
  for (Eigen::Index i = 0; i < n; ++i) os << ",h" << i;
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index t = 0; t < traj.states.cols(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < p; ++i) {
      os << ',';
      if (t < traj.inputs.cols()) os << traj.inputs(i, t);
    }
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << traj.states(i, t);
    os << '\n';
  }
}

}  // namespace nlsysid
