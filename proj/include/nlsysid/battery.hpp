#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlsysid/theory.hpp"
#include "nlsysid/verify.hpp"

namespace nlsysid {

/// Relative Frobenius error of `grad_single` against central differences at
/// random points whose pre-activations stay at least `kink_margin` away
/// from zero; one report per activation.
struct GradientSuiteOptions {
  int points = 100;
  Eigen::Index n = 3;
  Eigen::Index p = 4;
  double step = 1e-6;
  double kink_margin = 1e-3;
  double tolerance = 1e-5;
};

std::vector<CheckReport> gradient_suite(const std::vector<Activation>& acts, std::uint64_t seed,
                                        const GradientSuiteOptions& opt = {});

/// Truncation, input-Lipschitz and sub-trajectory independence checks over
/// random stable systems, activations cycling through linear, ReLU and two
/// leaky ReLUs.
struct DeterministicSuiteOptions {
  int systems = 20;
  Eigen::Index n = 5;
  Eigen::Index p = 8;
  std::vector<double> a_norms = {0.3, 0.7};
  Eigen::Index horizon = 60;
  Eigen::Index max_window = 10;
  int perturbations = 5;
  std::vector<Eigen::Index> rates = {2, 3, 5};
  int independence_trials = 5;
};

std::vector<CheckReport> deterministic_suite(std::uint64_t seed, const DeterministicSuiteOptions& opt = {});

/// Collapses a covariance certification into a CheckReport whose bounds
/// already include the 3-standard-error tolerance.
CheckReport to_check(const CovarianceReport& rep, const std::string& name);

struct CovarianceSuiteOptions {
  std::vector<double> betas = {0.25, 0.5, 1.0};
  std::vector<double> a_norms = {0.0, 0.5, 0.9};
  std::vector<Eigen::Index> dims = {1, 3};
  std::vector<long> times = {1, 5, 20};
  long samples = 50000;
};

/// β = 1 uses the linear activation, smaller β the leaky ReLU; p = n.
std::vector<CovarianceReport> covariance_suite(std::uint64_t seed, const CovarianceSuiteOptions& opt = {},
                                               std::vector<std::string>* names = nullptr);

}  // namespace nlsysid
