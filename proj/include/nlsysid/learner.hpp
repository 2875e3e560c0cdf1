#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsysid/activation.hpp"
#include "nlsysid/linalg.hpp"
#include "nlsysid/simulator.hpp"

namespace nlsysid {

/// Θ ∈ R^{n×(n+p)}.
using ParamMatrix = RowMatrix;

/// Regression samples x_t = [μ·h_t; u_t], y_t = h_{t+1}, stored as columns.
///
/// `n` is the output dimension (rows of y) and `p = x.rows() − n`. Generic
/// single-output problems built with `make_dataset` use the same layout.
struct RegressionDataset {
  Matrix x;  // (n+p)×N
  Matrix y;  // n×N
  double mu = 1.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;

  Eigen::Index size() const { return x.cols(); }
};

/// Samples t = 1..N of a trajectory with inputs u_0..u_N; t = 0 is skipped.
RegressionDataset build_dataset(const Trajectory& traj, double mu);
/// One sample per independent trajectory.
RegressionDataset build_dataset(const MultiTrajectorySample& sample, double mu);
/// Arbitrary (x, y) pairs; μ = 1.
RegressionDataset make_dataset(Matrix x, Matrix y);

/// C = [μ⁻¹A  B].
ParamMatrix encode(const Matrix& a, const Matrix& b, double mu);

struct DecodedWeights {
  Matrix a_hat;
  Matrix b_hat;
};

/// Inverse of `encode`: Â = μ·Θ[:, :n], B̂ = Θ[:, n:].
DecodedWeights decode(const ParamMatrix& theta, double mu);

/// (1/N)·Σ_t ½‖y_t − φ(Θx_t)‖².
double loss(const ParamMatrix& theta, const RegressionDataset& ds, const Activation& act);

/// ½‖y − φ(Θx)‖² for one sample.
double sample_loss(const ParamMatrix& theta, const Vector& x, const Vector& y, const Activation& act);

/// Row i is (φ(⟨θ_i, x⟩) − y_i)·φ′(⟨θ_i, x⟩)·xᵀ.
ParamMatrix grad_single(const ParamMatrix& theta, const Vector& x, const Vector& y,
                        const Activation& act);

/// Empirical scaling: sqrt(‖Σ_u‖ / ‖Σ_h‖) over samples t = 1..N.
double empirical_scaling(const Trajectory& traj);
/// Same ratio for explicit state and input samples (columns).
double empirical_scaling(const Matrix& states, const Matrix& inputs);

struct MuMode {
  enum class Kind { Theoretical, Empirical, Explicit };
  Kind kind = Kind::Empirical;
  double value = 1.0;  // used by Explicit

  static MuMode theoretical() { return {Kind::Theoretical, 0.0}; }
  static MuMode empirical() { return {Kind::Empirical, 0.0}; }
  static MuMode explicit_value(double v) { return {Kind::Explicit, v}; }
};

/// "theoretical", "empirical" or a positive number.
MuMode mu_mode_from_string(const std::string& s);
std::string to_string(const MuMode& m);

/// Theoretical mode uses 1/B_∞ and therefore needs ‖A‖ < 1.
double select_mu(const MuMode& mode, const Trajectory& traj, const SystemParams& params);

struct LearnerConfig {
  MuMode mu_mode = MuMode::empirical();
  double eta = 0.01;
  long iterations = 0;
  std::optional<ParamMatrix> theta0;  // zero when absent
  std::uint64_t seed = 0;
  long trace_stride = 100;

  void validate() const;
};

/// Metrics at iterations 0, k, 2k, ... plus the final iterate.
struct TrainTrace {
  std::vector<long> iterations;
  std::vector<double> normalized_error;  // empty unless the truth was supplied
  std::vector<double> normalized_loss;
  ParamMatrix theta;
  DecodedWeights weights;
  std::optional<double> final_error;
  double final_loss = 0.0;
};

/// Called with (τ, Θ_τ) for τ = 0 and after every update.
using IterateObserver = std::function<void(long, const ParamMatrix&)>;

/// The bare SGD loop; returns the final iterate.
ParamMatrix sgd_run(const RegressionDataset& ds, const LearnerConfig& cfg, const Activation& act,
                    const IterateObserver& observe = {});

/// Constant-step SGD with indices drawn i.i.d. uniformly (with replacement)
/// from Rng(cfg.seed). `truth` is the reparameterized C used for the error.
TrainTrace sgd_train(const RegressionDataset& ds, const LearnerConfig& cfg, const Activation& act,
                     const std::optional<ParamMatrix>& truth = std::nullopt);

/// ‖Θ̂ − C‖²_F / ‖C‖²_F. Rejects C = 0 and mismatched shapes.
double normalized_error(const ParamMatrix& theta_hat, const ParamMatrix& truth);

/// Σ_t ‖y_t − φ(Θ̂x_t)‖² / Σ_t ‖y_t‖² over the same N samples. Rejects all-zero y.
double normalized_loss(const ParamMatrix& theta_hat, const RegressionDataset& ds, const Activation& act);

/// CSV with header `iteration,normalized_error,normalized_loss`.
void write_trace_csv(std::ostream& os, const TrainTrace& trace);

nlohmann::json weights_to_json(const DecodedWeights& w, double mu);

}  // namespace nlsysid
