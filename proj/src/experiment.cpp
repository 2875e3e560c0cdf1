#include "nlsysid/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nlsysid/rng.hpp"
#include "nlsysid/simulator.hpp"

namespace nlsysid {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void shifted_moments(const std::vector<double>& v, double& mean, double& sd) {
  const double ref = v.front();
  double shift = 0.0;
  for (double x : v) shift += x - ref;
  mean = ref + shift / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size()));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 1 || p < 1 || N < 1) throw std::invalid_argument("experiment: n, p and N must be positive");
  if (!(a_norm >= 0.0)) throw std::invalid_argument("experiment: a_norm must be nonnegative");
  if (activations.empty()) throw std::invalid_argument("experiment: activation sweep is empty");
  if (!(eta > 0.0)) throw std::invalid_argument("experiment: eta must be positive");
  if (iterations < 0) throw std::invalid_argument("experiment: iterations must be nonnegative");
  if (realizations < 1) throw std::invalid_argument("experiment: realizations must be at least 1");
  if (trace_stride < 1) throw std::invalid_argument("experiment: trace_stride must be positive");
  std::set<std::string> labels;
  for (const auto& a : activations) {
    if (!labels.insert(a.label()).second) throw std::invalid_argument("experiment: duplicate activation " + a.label());
  }
  if (mu_mode.kind == MuMode::Kind::Theoretical && !(a_norm < 1.0)) {
    throw std::invalid_argument("experiment: theoretical mu needs a_norm < 1");
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.n = j.value("n", cfg.n);
  cfg.p = j.value("p", cfg.p);
  cfg.N = j.value("N", cfg.N);
  cfg.a_norm = j.value("a_norm", cfg.a_norm);
  if (j.contains("activations")) {
    for (const auto& a : j.at("activations")) cfg.activations.push_back(activation_from_json(a));
  }
  cfg.eta = j.value("eta", cfg.eta);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.realizations = j.value("realizations", cfg.realizations);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("mu_mode")) {
    const auto& m = j.at("mu_mode");
    cfg.mu_mode = m.is_number() ? MuMode::explicit_value(m.get<double>()) : mu_mode_from_string(m.get<std::string>());
  }
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.trace_stride = j.value("trace_stride", cfg.trace_stride);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : cfg.activations) acts.push_back(to_json(a));
  nlohmann::json mu = cfg.mu_mode.kind == MuMode::Kind::Explicit ? nlohmann::json(cfg.mu_mode.value)
                                                                 : nlohmann::json(to_string(cfg.mu_mode));
  return {{"n", cfg.n},
          {"p", cfg.p},
          {"N", cfg.N},
          {"a_norm", cfg.a_norm},
          {"activations", acts},
          {"eta", cfg.eta},
          {"iterations", cfg.iterations},
          {"realizations", cfg.realizations},
          {"seed", cfg.seed},
          {"mu_mode", mu},
          {"output_dir", cfg.output_dir},
          {"trace_stride", cfg.trace_stride}};
}

double ActivationResult::final_mean_error() const {
  return aggregate.mean_error.empty() ? std::numeric_limits<double>::quiet_NaN() : aggregate.mean_error.back();
}

double ActivationResult::final_std_error() const {
  return aggregate.std_error.empty() ? std::numeric_limits<double>::quiet_NaN() : aggregate.std_error.back();
}

double ActivationResult::final_mean_loss() const {
  return aggregate.mean_loss.empty() ? std::numeric_limits<double>::quiet_NaN() : aggregate.mean_loss.back();
}

TraceAggregate aggregate_traces(const std::vector<const TrainTrace*>& traces) {
  if (traces.empty()) throw std::invalid_argument("aggregate_traces: no traces");
  TraceAggregate agg;
  agg.iterations = traces.front()->iterations;
  const std::size_t len = agg.iterations.size();
  for (const auto* t : traces) {
    if (t->iterations != agg.iterations || t->normalized_loss.size() != len ||
        t->normalized_error.size() != len) {
      throw std::invalid_argument("aggregate_traces: traces have different record layouts");
    }
  }
  std::vector<double> column(traces.size());
  agg.mean_error.resize(len);
  agg.std_error.resize(len);
  agg.mean_loss.resize(len);
  agg.std_loss.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t r = 0; r < traces.size(); ++r) column[r] = traces[r]->normalized_error[k];
    shifted_moments(column, agg.mean_error[k], agg.std_error[k]);
    for (std::size_t r = 0; r < traces.size(); ++r) column[r] = traces[r]->normalized_loss[k];
    shifted_moments(column, agg.mean_loss[k], agg.std_loss[k]);
  }
  return agg;
}

Realization draw_realization(const ExperimentConfig& cfg, int r) {
  const auto idx = static_cast<std::uint64_t>(r);
  Rng system_rng = Rng::stream(cfg.seed, {stream_tag::kSystem, idx});
  Rng input_rng = Rng::stream(cfg.seed, {stream_tag::kInputs, idx});
  Realization out;
  out.params = random_system(cfg.n, cfg.p, cfg.a_norm, system_rng);
  out.inputs = gaussian_inputs(cfg.p, cfg.N + 1, input_rng);
  out.sgd_seed = Rng::stream(cfg.seed, {stream_tag::kSgd, idx}).engine()();
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  ExperimentResult result;
  result.config = cfg;
  for (const auto& act : cfg.activations) {
    ActivationResult ar;
    ar.act = act;
    ar.runs.resize(static_cast<std::size_t>(cfg.realizations));
    result.per_activation.push_back(std::move(ar));
  }

  auto run_realization = [&](int r) {
    Realization draw = draw_realization(cfg, r);
    SystemParams& params = draw.params;
    const Matrix& inputs = draw.inputs;
    const std::uint64_t sgd_seed = draw.sgd_seed;
    for (auto& ar : result.per_activation) {
      const auto t0 = Clock::now();
      params.act = ar.act;
      const Trajectory traj = simulate(params, inputs);
      const double mu = select_mu(cfg.mu_mode, traj, params);
      const RegressionDataset ds = build_dataset(traj, mu);
      LearnerConfig lc;
      lc.mu_mode = cfg.mu_mode;
      lc.eta = cfg.eta;
      lc.iterations = cfg.iterations;
      lc.seed = sgd_seed;
      lc.trace_stride = cfg.trace_stride;
      RealizationRun& run = ar.runs[static_cast<std::size_t>(r)];
      run.trace = sgd_train(ds, lc, ar.act, encode(params.a, params.b, mu));
      run.mu = mu;
      run.seconds = seconds_since(t0);
    }
  };

  const int workers = std::max(1, std::min(cfg.realizations, cfg.threads > 0
                                                                 ? cfg.threads
                                                                 : static_cast<int>(std::thread::hardware_concurrency())));
  if (workers == 1) {
    for (int r = 0; r < cfg.realizations; ++r) run_realization(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int r = next++; r < cfg.realizations; r = next++) run_realization(r);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (auto& ar : result.per_activation) {
    std::vector<const TrainTrace*> traces;
    for (const auto& run : ar.runs) traces.push_back(&run.trace);
    ar.aggregate = aggregate_traces(traces);
  }
  result.wall_seconds = seconds_since(start);
  return result;
}

nlohmann::json summary_json(const ExperimentResult& result) {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& ar : result.per_activation) {
    nlohmann::json finals = nlohmann::json::array();
    nlohmann::json mus = nlohmann::json::array();
    for (const auto& run : ar.runs) {
      finals.push_back(run.trace.final_error.value_or(std::numeric_limits<double>::quiet_NaN()));
      mus.push_back(run.mu);
    }
    acts.push_back({{"label", ar.act.label()},
                    {"activation", to_json(ar.act)},
                    {"final_mean_error", ar.final_mean_error()},
                    {"final_std_error", ar.final_std_error()},
                    {"final_mean_loss", ar.final_mean_loss()},
                    {"final_errors", finals},
                    {"mu", mus}});
  }
  return {{"config", to_json(result.config)}, {"activations", acts}};
}

void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& ar : result.per_activation) {
    std::ostringstream os;
    os << "iteration,mean_error,std_error,mean_loss,std_loss\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    const auto& a = ar.aggregate;
    for (std::size_t k = 0; k < a.iterations.size(); ++k) {
      os << a.iterations[k] << ',' << a.mean_error[k] << ',' << a.std_error[k] << ',' << a.mean_loss[k]
         << ',' << a.std_loss[k] << '\n';
    }
    write_file(dir / (ar.act.label() + ".csv"), os.str());
  }
  write_file(dir / "summary.json", summary_json(result).dump(2) + "\n");

  nlohmann::json timing;
  timing["wall_seconds"] = result.wall_seconds;
  for (const auto& ar : result.per_activation) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : ar.runs) runs.push_back(run.seconds);
    timing["runs"][ar.act.label()] = runs;
  }
  write_file(dir / "timing.json", timing.dump(2) + "\n");
}

}  // namespace nlsysid
