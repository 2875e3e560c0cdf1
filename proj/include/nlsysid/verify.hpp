#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsysid/activation.hpp"
#include "nlsysid/learner.hpp"
#include "nlsysid/simulator.hpp"

namespace nlsysid {

/// Outcome of one certification check. `pass` holds iff every observed[i] is
/// at most bound[i] + tolerance; `finalize` establishes that.
struct CheckReport {
  std::string name;
  std::vector<double> observed;
  std::vector<double> bound;
  double tolerance = 0.0;
  bool pass = false;
  long samples_used = 0;
  std::string detail;

  void add(double observed_value, double bound_value);
  void finalize();
};

nlohmann::json to_json(const CheckReport& report);

/// Central differences (L(Θ + h·E_ij) − L(Θ − h·E_ij)) / 2h of the per-sample loss.
ParamMatrix finite_diff_grad(const ParamMatrix& theta, const Vector& x, const Vector& y,
                             const Activation& act, double step);

/// ‖h_t − h̄_{t,L}‖ ≤ ‖A‖^L·‖h_{t−L}‖ for every t (0 when t ≤ L).
CheckReport check_truncation(const SystemParams& params, const Matrix& inputs, Eigen::Index window);

/// Perturbs u_τ by δ; ‖Δh_{t+1}‖ ≤ ‖A‖^{t−τ}·‖B‖·‖δ‖ for all t ≥ τ and no
/// change before τ.
CheckReport check_lipschitz_input(const SystemParams& params, const Matrix& inputs, Eigen::Index tau,
                                  const Vector& delta);

/// For each sub-trajectory sample i, the (L−1)-truncated state at
/// (i−1)L + τ must be bit-identical after every input outside
/// [(i−2)L+τ+1, (i−1)L+τ−1] is redrawn, and after every input at a timestamp
/// ≡ τ (mod L) is redrawn.
CheckReport check_independence_structure(const SystemParams& params, Eigen::Index rate,
                                         Eigen::Index offset, int trials, std::uint64_t seed,
                                         Eigen::Index horizon = 0);

/// Noiseless single-output problem y_i = φ(⟨x_i, θ⟩).
struct SingleRowProblem {
  Matrix x;  // d×N
  Vector y;
  Vector theta_star;
  Vector theta0;
  Activation act = Activation::linear();
};

/// Gaussian design, Gaussian θ*, θ0 = 0.
SingleRowProblem make_single_row_problem(Eigen::Index dim, Eigen::Index count, const Activation& act,
                                         std::uint64_t seed);

/// Measured γ₊ = λ_max, γ₋ = λ_min of (1/N)Σxxᵀ and B = max‖x_i‖².
struct DesignBounds {
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  double row_bound = 0.0;
};

DesignBounds measure_design(const Matrix& x);

/// Averages ‖θ_τ − θ‖² over `runs` independent SGD index sequences with
/// η = β²γ₋/(γ₊B) and compares with ‖θ0 − θ‖²(1 − β⁴γ₋²/(γ₊B))^τ·(1 + 3/√runs).
CheckReport check_rate_bound(const SingleRowProblem& problem, int runs,
                             const std::vector<long>& checkpoints, std::uint64_t seed);

}  // namespace nlsysid
