#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "nlsysid/activation.hpp"
#include "nlsysid/linalg.hpp"
#include "nlsysid/rng.hpp"

namespace nlsysid {

/// Ground truth of h_{t+1} = φ(A·h_t + B·u_t).
struct SystemParams {
  Matrix a;  // n×n
  Matrix b;  // n×p
  Activation act = Activation::linear();

  Eigen::Index n() const { return a.rows(); }
  Eigen::Index p() const { return b.cols(); }

  /// Throws std::invalid_argument unless A is square, B has n rows and both
  /// are finite.
  void validate() const;
};

/// One application of the state map.
Vector step(const SystemParams& params, const Vector& h, const Vector& u);

/// Inputs u_0..u_T (columns of a p×(T+1) matrix) and states h_0..h_{T+1}
/// (columns of an n×(T+2) matrix).
struct Trajectory {
  Matrix inputs;
  Matrix states;

  Eigen::Index input_count() const { return inputs.cols(); }
  /// Largest t for which the triple (h_t, u_t, h_{t+1}) exists.
  Eigen::Index last_sample_index() const { return inputs.cols() - 1; }
  /// True when h0 was not the zero vector; such runs are outside the theory.
  bool nonzero_initial_state = false;
};

Trajectory simulate(const SystemParams& params, const Matrix& inputs);
Trajectory simulate(const SystemParams& params, const Matrix& inputs, const Vector& h0);

/// `count` i.i.d. N(0, I_p) vectors as the columns of a p×count matrix.
Matrix gaussian_inputs(Eigen::Index p, Eigen::Index count, Rng& rng);

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix with the
/// sign of R's diagonal folded into Q.
Matrix random_orthogonal(Eigen::Index n, Rng& rng);

/// A = target_spectral_norm · (random orthogonal), B with i.i.d. N(0,1) entries.
SystemParams random_system(Eigen::Index n, Eigen::Index p, double target_spectral_norm, Rng& rng,
                           const Activation& act = Activation::linear());

/// L-truncation h̄_{t,L}: the state at time t of the system started from zero
/// whose inputs before t−L are zeroed. Depends only on u_{t−L}..u_{t−1}.
Vector truncated_state(const SystemParams& params, const Matrix& inputs, Eigen::Index t,
                       Eigen::Index window);

/// Samples of a trajectory at timestamps (i−1)·L + offset, i = 1..N̄, where N̄
/// is the largest count with (N̄−1)·L + offset ≤ N and N is the last sample
/// index of the trajectory.
struct SubTrajectory {
  std::vector<Eigen::Index> times;
  Matrix states;  // n×N̄
  Matrix inputs;  // p×N̄
};

SubTrajectory subsample(const Trajectory& traj, Eigen::Index rate, Eigen::Index offset);

/// One (h_{T0+1}, h_{T0}, u_{T0}) triple from each of N independent
/// trajectories, all started at zero. Column i holds trajectory i.
struct MultiTrajectorySample {
  Matrix next_states;  // y: n×N
  Matrix states;       // h: n×N
  Matrix inputs;       // u: p×N
};

/// Trajectory i draws its inputs from Rng::stream(seed, {kTrajectory, i}), so
/// the result does not depend on evaluation order.
MultiTrajectorySample multi_trajectory_sample(const SystemParams& params, Eigen::Index count,
                                              Eigen::Index t0, std::uint64_t seed);

/// Debug dump: header `t,u0..,h0..`; one row per t, the final state row has
/// empty input columns.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace nlsysid
