#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "nlsysid/linalg.hpp"
#include "nlsysid/simulator.hpp"

namespace nlsysid {

/// Absolute constants of the convergence guarantees. They are never pinned
/// numerically, so they are configuration rather than claims.
struct TheoryConstants {
  double c = 1.0;   // inside the truncation length
  double C = 1.0;   // sample-size multiplier
  double c0 = 1.0;  // learning-rate multiplier
};

/// γ₊, γ₋, θ and L of the well-behaved-state assumption.
struct AssumptionParams {
  double gamma_plus = 1.0;
  double gamma_minus = 1.0;
  double theta = 0.0;
  int window = 2;

  void validate() const;
};

/// B_t = ‖B‖·sqrt((1−‖A‖^{2t}) / (1−‖A‖²)); B_0 = 0 and B_t = ‖B‖·√t at ‖A‖ = 1.
double b_t(double a_norm, double b_norm, long t);
/// lim B_t; requires a_norm < 1.
double b_inf(double a_norm, double b_norm);

/// Condition-number bound of the stationary state covariance,
/// (‖B‖/λ_min(B))² / (β²(1−‖A‖²)). Rejects β = 0, ‖A‖ ≥ 1 and rank-deficient B.
double rho_stable(const SystemParams& params);

/// Condition-number bound for samples taken at time T0 of independent
/// trajectories. For n = 1 the factor (1−β²|A|²)/(1−(β|A|)^{2T0}) is applied
/// as 1/Σ_{i<T0}(β|A|)^{2i}, which stays finite at β|A| = 1.
double rho_unstable(const SystemParams& params, long t0);

/// L = ⌈1 − log(c·n·ρ)/log‖A‖⌉, clamped below at 2.
int truncation_length(long n, double rho, double a_norm, double c);

enum class Regime { Stable, Odd, Unstable };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct HyperParams {
  double rho = 0.0;
  double mu = 0.0;
  double eta = 0.0;
  double rate = 0.0;          // predicted contraction of E‖Θ_τ − C‖²_F per step
  long n_min = 0;             // minimum trajectory length / trajectory count
  std::optional<int> window;  // L; absent in the unstable regime
};

/// Hyperparameter recipes of the single-trajectory (stable, odd) and
/// multi-trajectory (unstable, sampled at t0) results.
HyperParams theoretical_hparams(const SystemParams& params, Regime regime, long t0 = 1,
                                const TheoryConstants& k = {});

/// General recipe driven directly by assumption parameters: μ = 1/√γ₊,
/// η = c0·β²/(ρ(θ+√2)²(n+p)) with ρ = γ₊/γ₋.
HyperParams general_hparams(const AssumptionParams& assumption, double beta, long n, long p,
                            double a_norm, const TheoryConstants& k = {});

struct TheoryReport {
  Regime regime = Regime::Stable;
  double a_norm = 0.0;
  double b_norm = 0.0;
  double b_min = 0.0;
  double beta = 0.0;
  long t = 0;
  double b_t = 0.0;
  std::optional<double> b_inf;  // absent (+∞) when ‖A‖ ≥ 1
  long t0 = 1;
  HyperParams hparams;
  TheoryConstants constants;
};

TheoryReport theory_report(const SystemParams& params, Regime regime, long t, long t0 = 1,
                           const TheoryConstants& k = {});

nlohmann::json to_json(const TheoryReport& report);

/// Mean-centred covariance with 1/N normalization of the columns of a d×N
/// sample matrix.
Matrix empirical_covariance(const Matrix& samples);

struct DataMatrixCondition {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double max_row_norm = 0.0;
};

/// Extreme eigenvalues of XᵀX/N and the largest row ℓ2 norm of an N×d data
/// matrix. Rejects N < d.
DataMatrixCondition data_matrix_condition(const Matrix& rows);

/// Comparison of a measured data matrix against (θ+√2)² ⪰ XᵀX/N ⪰ ρ⁻¹/2 and
/// the row bound c0·√(n+p). `row_constant` is the measured c0.
struct DataMatrixCertificate {
  DataMatrixCondition condition;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  double row_constant = 0.0;
  bool positive_definite = false;
  bool upper_ok = false;
  bool lower_ok = false;
};

DataMatrixCertificate certify_data_matrix(const Matrix& rows, double theta, double rho);

/// Monte Carlo certification of the state covariance at time t against
/// B_t²·I ⪰ Cov(h_t) ⪰ β²·s_min(BBᵀ)·I, the n = 1 variance bound, the
/// E‖h_t‖² bound and, for odd activations, E[h_t] = 0.
///
/// Tolerances are three standard errors estimated from 50 equal batches.
/// `eig_min`/`eig_max` are held-out Rayleigh quotients: the extreme
/// eigenvectors are estimated from the first 5 batches and evaluated on each
/// of the other 45. `plugin_eig_*` are the eigenvalues of the pooled sample
/// covariance.
struct CovarianceReport {
  long t = 0;
  long samples = 0;
  double eig_min = 0.0;
  double eig_max = 0.0;
  double se_min = 0.0;
  double se_max = 0.0;
  double plugin_eig_min = 0.0;
  double plugin_eig_max = 0.0;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  std::optional<double> miso_bound;
  double mean_sq_norm = 0.0;
  double mean_sq_norm_se = 0.0;
  double mean_sq_norm_bound = 0.0;
  double mean_norm = 0.0;
  double mean_tolerance = 0.0;

  bool upper_ok = false;
  std::optional<bool> lower_ok;  // only when β > 0
  std::optional<bool> miso_ok;   // only when n = 1 and β > 0
  bool norm_ok = false;
  std::optional<bool> mean_ok;   // only for odd activations

  bool pass() const;
};

CovarianceReport covariance_bounds_check(const SystemParams& params, long t, long num_samples,
                                         std::uint64_t seed);

nlohmann::json to_json(const CovarianceReport& report);

}  // namespace nlsysid
