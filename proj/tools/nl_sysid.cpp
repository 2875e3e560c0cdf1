// nl-sysid: simulate, analyse and learn h_{t+1} = φ(A·h_t + B·u_t).
//
// Exit status: 0 success, 1 a verification check failed, 2 usage or
// configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlsysid/activation.hpp"
#include "nlsysid/battery.hpp"
#include "nlsysid/experiment.hpp"
#include "nlsysid/learner.hpp"
#include "nlsysid/rng.hpp"
#include "nlsysid/simulator.hpp"
#include "nlsysid/theory.hpp"
#include "nlsysid/verify.hpp"

namespace {

using namespace nlsysid;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemOptions {
  long n = 2;
  long p = 2;
  double a_norm = 0.5;
  std::string b_kind = "gaussian";
  std::string activation = "leaky_relu:0.5";
  std::uint64_t seed = 0;
};

void add_system_options(CLI::App* cmd, SystemOptions& o) {
  cmd->add_option("--n", o.n, "state dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--p", o.p, "input dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--a-norm", o.a_norm, "spectral norm of A")->check(CLI::NonNegativeNumber);
  cmd->add_option("--b", o.b_kind, "input matrix: gaussian or identity")
      ->check(CLI::IsMember({"gaussian", "identity"}));
  cmd->add_option("--activation", o.activation, "linear, relu, leaky_relu:<beta>, blend_relu:<beta>");
  cmd->add_option("--seed", o.seed, "master seed");
}

SystemParams make_system(const SystemOptions& o) {
  Rng rng = Rng::stream(o.seed, {stream_tag::kSystem, 0});
  SystemParams params = random_system(o.n, o.p, o.a_norm, rng, parse_activation(o.activation));
  if (o.b_kind == "identity") params.b = Matrix::Identity(o.n, o.p);
  return params;
}

std::ostream* open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return &std::cout;
  if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path);
  return &file;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("invalid JSON in " + path + ": " + e.what());
  }
}

int print_reports(const std::vector<CheckReport>& reports, const std::string& out) {
  bool ok = true;
  nlohmann::json all = nlohmann::json::array();
  for (const auto& r : reports) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  (" << r.samples_used << " samples)";
    if (!r.detail.empty()) std::cout << "  " << r.detail;
    std::cout << '\n';
    ok = ok && r.pass;
    all.push_back(to_json(r));
  }
  if (!out.empty()) {
    std::ofstream file;
    *open_out(out, file) << all.dump(2) << '\n';
  }
  std::cout << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate, analyse and learn nonlinear state equations h' = phi(A h + B u)"};
  app.require_subcommand(1);

  // simulate
  SystemOptions sim_sys;
  long sim_steps = 100;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "simulate one trajectory and write it as CSV");
  add_system_options(sim, sim_sys);
  sim->add_option("--steps", sim_steps, "number of inputs u_0..u_{T}")->check(CLI::PositiveNumber);
  sim->add_option("--out", sim_out, "output CSV (default stdout)");

  // theory
  SystemOptions th_sys;
  th_sys.b_kind = "identity";
  std::optional<double> th_beta;
  std::string th_mode = "stable";
  long th_t = 10;
  long th_t0 = 1;
  TheoryConstants th_k;
  std::string th_out;
  auto* th = app.add_subcommand("theory", "print the closed-form bounds and hyperparameters as JSON");
  add_system_options(th, th_sys);
  th->add_option("--beta", th_beta, "leaky ReLU slope (1 selects the linear activation)")
      ->check(CLI::Range(0.0, 1.0));
  th->add_option("--mode", th_mode, "stable, odd or unstable")->check(CLI::IsMember({"stable", "odd", "unstable"}));
  th->add_option("--t", th_t, "time index for B_t")->check(CLI::NonNegativeNumber);
  th->add_option("--t0", th_t0, "sampling time for the unstable regime")->check(CLI::PositiveNumber);
  th->add_option("--c", th_k.c, "truncation constant");
  th->add_option("--C", th_k.C, "sample-size constant");
  th->add_option("--c0", th_k.c0, "learning-rate constant");
  th->add_option("--out", th_out, "output JSON (default stdout)");

  // train
  SystemOptions tr_sys;
  long tr_samples = 500;
  double tr_eta = 0.01;
  long tr_iterations = 50000;
  std::string tr_mu = "empirical";
  long tr_stride = 100;
  std::string tr_out = "train_out";
  std::string tr_config;
  auto* tr = app.add_subcommand("train", "learn (A, B) from one simulated trajectory");
  add_system_options(tr, tr_sys);
  tr->add_option("--samples,-N", tr_samples, "trajectory length N")->check(CLI::PositiveNumber);
  tr->add_option("--eta", tr_eta, "learning rate")->check(CLI::PositiveNumber);
  tr->add_option("--iterations", tr_iterations, "SGD iterations")->check(CLI::NonNegativeNumber);
  tr->add_option("--mu", tr_mu, "theoretical, empirical or a positive number");
  tr->add_option("--stride", tr_stride, "trace stride")->check(CLI::PositiveNumber);
  tr->add_option("--config", tr_config, "experiment JSON; its first activation and realization 0 are used");
  tr->add_option("--out", tr_out, "output directory for trace.csv and weights.json");

  // experiment
  std::string ex_config;
  std::string ex_out;
  std::optional<std::uint64_t> ex_seed;
  auto* ex = app.add_subcommand("experiment", "run a multi-realization sweep from a JSON config");
  ex->add_option("--config", ex_config, "experiment JSON")->required();
  ex->add_option("--out", ex_out, "output directory (overrides output_dir)");
  ex->add_option("--seed", ex_seed, "master seed (overrides seed)");

  // verify
  std::string vf_suite = "all";
  std::uint64_t vf_seed = 1;
  std::string vf_out;
  auto* vf = app.add_subcommand("verify", "run the verification battery");
  vf->add_option("--suite", vf_suite, "all, deterministic, gradient or statistical")
      ->check(CLI::IsMember({"all", "deterministic", "gradient", "statistical"}));
  vf->add_option("--seed", vf_seed, "master seed");
  vf->add_option("--out", vf_out, "write reports as JSON");
  vf->add_option("--config", vf_out, "unused; accepted for symmetry")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) {
      const SystemParams params = make_system(sim_sys);
      Rng rng = Rng::stream(sim_sys.seed, {stream_tag::kInputs, 0});
      const Trajectory traj = simulate(params, gaussian_inputs(params.p(), sim_steps, rng));
      std::ofstream file;
      write_trajectory_csv(*open_out(sim_out, file), traj);
      return kOk;
    }

    if (*th) {
      SystemOptions o = th_sys;
      if (th_beta) o.activation = *th_beta == 1.0 ? "linear" : "leaky_relu:" + std::to_string(*th_beta);
      SystemParams params = make_system(o);
      if (th_beta && *th_beta != 1.0) params.act = Activation::leaky_relu(*th_beta);
      const TheoryReport report = theory_report(params, regime_from_string(th_mode), th_t, th_t0, th_k);
      std::ofstream file;
      *open_out(th_out, file) << to_json(report).dump(2) << '\n';
      return kOk;
    }

    if (*tr) {
      ExperimentConfig cfg;
      if (!tr_config.empty()) {
        cfg = experiment_config_from_json(read_json_file(tr_config));
      } else {
        cfg.n = tr_sys.n;
        cfg.p = tr_sys.p;
        cfg.N = tr_samples;
        cfg.a_norm = tr_sys.a_norm;
        cfg.activations = {parse_activation(tr_sys.activation)};
        cfg.eta = tr_eta;
        cfg.iterations = tr_iterations;
        cfg.seed = tr_sys.seed;
        cfg.mu_mode = mu_mode_from_string(tr_mu);
        cfg.trace_stride = tr_stride;
      }
      cfg.realizations = 1;
      cfg.activations.erase(cfg.activations.begin() + 1, cfg.activations.end());
      const ExperimentResult res = run_experiment(cfg);
      const RealizationRun& run = res.per_activation.front().runs.front();
      const std::filesystem::path dir(tr_out);
      std::filesystem::create_directories(dir);
      {
        std::ofstream f(dir / "trace.csv", std::ios::binary);
        write_trace_csv(f, run.trace);
      }
      {
        std::ofstream f(dir / "weights.json", std::ios::binary);
        f << weights_to_json(run.trace.weights, run.mu).dump(2) << '\n';
      }
      std::cout << "final normalized error " << run.trace.final_error.value_or(0.0) << ", normalized loss "
                << run.trace.final_loss << '\n';
      return kOk;
    }

    if (*ex) {
      ExperimentConfig cfg = experiment_config_from_json(read_json_file(ex_config));
      if (!ex_out.empty()) cfg.output_dir = ex_out;
      if (ex_seed) cfg.seed = *ex_seed;
      const ExperimentResult res = run_experiment(cfg);
      write_experiment_outputs(res, cfg.output_dir);
      for (const auto& ar : res.per_activation) {
        std::cout << ar.act.label() << ": final mean normalized error " << ar.final_mean_error() << " (std "
                  << ar.final_std_error() << ")\n";
      }
      return kOk;
    }

    if (*vf) {
      std::vector<CheckReport> reports;
      if (vf_suite == "all" || vf_suite == "gradient") {
        auto r = gradient_suite({Activation::linear(), Activation::leaky_relu(0.25), Activation::leaky_relu(0.5),
                                 Activation::relu()},
                                vf_seed);
        reports.insert(reports.end(), r.begin(), r.end());
      }
      if (vf_suite == "all" || vf_suite == "deterministic") {
        auto r = deterministic_suite(vf_seed);
        reports.insert(reports.end(), r.begin(), r.end());
      }
      if (vf_suite == "all" || vf_suite == "statistical") {
        std::vector<std::string> names;
        const auto cov = covariance_suite(vf_seed, {}, &names);
        for (std::size_t i = 0; i < cov.size(); ++i) reports.push_back(to_check(cov[i], names[i]));
        const SingleRowProblem prob = make_single_row_problem(10, 200, Activation::leaky_relu(0.5), vf_seed);
        reports.push_back(check_rate_bound(prob, 200, {10, 100, 1000}, vf_seed));
      }
      return print_reports(reports, vf_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad configuration: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
