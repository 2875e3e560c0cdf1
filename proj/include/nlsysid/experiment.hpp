#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsysid/activation.hpp"
#include "nlsysid/learner.hpp"

namespace nlsysid {

/// Synthetic identification sweep: for every realization a fresh random
/// system (A = a_norm·orthogonal, B Gaussian) and Gaussian input sequence are
/// drawn once and shared by every activation in the sweep.
struct ExperimentConfig {
  long n = 50;
  long p = 100;
  long N = 500;  // samples; the simulated trajectory has N+1 inputs
  double a_norm = 0.5;
  std::vector<Activation> activations;
  double eta = 0.01;
  long iterations = 50000;
  int realizations = 20;
  std::uint64_t seed = 0;
  MuMode mu_mode = MuMode::empirical();
  std::string output_dir = "results";
  long trace_stride = 100;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Per-record mean and population standard deviation across realizations.
struct TraceAggregate {
  std::vector<long> iterations;
  std::vector<double> mean_error;
  std::vector<double> std_error;
  std::vector<double> mean_loss;
  std::vector<double> std_loss;
};

struct RealizationRun {
  TrainTrace trace;
  double mu = 0.0;
  double seconds = 0.0;
};

struct ActivationResult {
  Activation act = Activation::linear();
  std::vector<RealizationRun> runs;  // indexed by realization
  TraceAggregate aggregate;

  double final_mean_error() const;
  double final_std_error() const;
  double final_mean_loss() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ActivationResult> per_activation;
  double wall_seconds = 0.0;
};

/// Realization r: system from stream (seed, system, r), inputs u_0..u_N from
/// (seed, inputs, r) and the SGD index seed from (seed, sgd, r).
struct Realization {
  SystemParams params;
  Matrix inputs;
  std::uint64_t sgd_seed = 0;
};
Realization draw_realization(const ExperimentConfig& cfg, int r);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Mean and population standard deviation of equally long traces. The mean
/// is accumulated relative to the first trace, so identical traces give a
/// standard deviation of exactly zero.
TraceAggregate aggregate_traces(const std::vector<const TrainTrace*>& traces);

/// Writes `<label>.csv` per activation (header
/// `iteration,mean_error,std_error,mean_loss,std_loss`), `summary.json` with
/// final errors, and `timing.json` with wall-clock times. Everything except
/// timing.json is a pure function of the config.
void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

nlohmann::json summary_json(const ExperimentResult& result);

}  // namespace nlsysid
