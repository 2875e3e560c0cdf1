#include "nlsysid/theory.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlsysid {

namespace {

constexpr int kBatches = 50;
// Batches used only to estimate the extreme eigenvectors.
constexpr int kDirectionBatches = 5;

double geometric_sum(double ratio, long terms) {
  double sum = 0.0;
  double power = 1.0;
  for (long i = 0; i < terms; ++i) {
    sum += power;
    power *= ratio;
  }
  return sum;
}

void require_positive_beta(double beta, const char* who) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": activation must be strictly increasing (beta > 0)");
  }
}

double b_min_of(const SystemParams& params, const char* who) {
  const double b_min = min_singular_value(params.b);
  if (!(b_min > 1e-12 * std::max(1.0, spectral_norm(params.b)))) {
    throw std::invalid_argument(std::string(who) + ": B must have full row rank (p >= n)");
  }
  return b_min;
}

struct BatchStats {
  double mean = 0.0;
  double se = 0.0;
};

template <std::size_t K>
BatchStats batch_stats(const std::array<double, K>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(K);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(K - 1));
  return {mean, sd / std::sqrt(static_cast<double>(K))};
}

}  // namespace

void AssumptionParams::validate() const {
  if (!(gamma_minus > 0.0) || !(gamma_plus >= gamma_minus)) {
    throw std::invalid_argument("AssumptionParams: need gamma_plus >= gamma_minus > 0");
  }
  if (!(theta >= 0.0)) throw std::invalid_argument("AssumptionParams: theta must be nonnegative");
  if (window < 2) throw std::invalid_argument("AssumptionParams: L must be at least 2");
}

double b_t(double a_norm, double b_norm, long t) {
  if (!(a_norm >= 0.0) || !(b_norm >= 0.0) || t < 0) {
    throw std::invalid_argument("b_t: need a_norm >= 0, b_norm >= 0 and t >= 0");
  }
  const double a2 = a_norm * a_norm;
  double ratio;
  if (std::abs(1.0 - a2) < 1e-12) {
    ratio = static_cast<double>(t);
  } else if (t <= 64) {
    ratio = geometric_sum(a2, t);
  } else {
    ratio = (1.0 - std::pow(a2, static_cast<double>(t))) / (1.0 - a2);
  }
  return b_norm * std::sqrt(ratio);
}

double b_inf(double a_norm, double b_norm) {
  if (!(a_norm >= 0.0 && a_norm < 1.0)) {
    throw std::invalid_argument("b_inf: the limit exists only for a_norm < 1");
  }
  if (!(b_norm >= 0.0)) throw std::invalid_argument("b_inf: b_norm must be nonnegative");
  return b_norm / std::sqrt(1.0 - a_norm * a_norm);
}

double rho_stable(const SystemParams& params) {
  params.validate();
  const double beta = params.act.min_slope();
  require_positive_beta(beta, "rho_stable");
  const double a_norm = spectral_norm(params.a);
  if (!(a_norm < 1.0)) throw std::invalid_argument("rho_stable: requires ||A|| < 1");
  const double b_min = b_min_of(params, "rho_stable");
  const double kappa = spectral_norm(params.b) / b_min;
  return kappa * kappa / (beta * beta * (1.0 - a_norm * a_norm));
}

double rho_unstable(const SystemParams& params, long t0) {
  params.validate();
  if (t0 < 1) throw std::invalid_argument("rho_unstable: T0 must be at least 1");
  const double beta = params.act.min_slope();
  require_positive_beta(beta, "rho_unstable");
  const double b_min = b_min_of(params, "rho_unstable");
  const double a_norm = spectral_norm(params.a);
  const double bt = b_t(a_norm, spectral_norm(params.b), t0);
  const double rho_bar = bt * bt / (beta * beta * b_min * b_min);
  if (params.n() > 1) return rho_bar;
  const double r = beta * beta * a_norm * a_norm;
  return rho_bar / geometric_sum(r, t0);
}

int truncation_length(long n, double rho, double a_norm, double c) {
  if (!(a_norm >= 0.0 && a_norm < 1.0)) {
    throw std::invalid_argument("truncation_length: requires 0 <= ||A|| < 1");
  }
  const double cnr = c * static_cast<double>(n) * rho;
  if (!(cnr >= 1.0)) throw std::invalid_argument("truncation_length: requires c*n*rho >= 1");
  if (a_norm == 0.0) return 2;
  const double l = std::ceil(1.0 - std::log(cnr) / std::log(a_norm));
  return std::max(2, static_cast<int>(l));
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Stable:
      return "stable";
    case Regime::Odd:
      return "odd";
    case Regime::Unstable:
      return "unstable";
  }
  return "stable";
}

Regime regime_from_string(const std::string& s) {
  if (s == "stable") return Regime::Stable;
  if (s == "odd") return Regime::Odd;
  if (s == "unstable") return Regime::Unstable;
  throw std::invalid_argument("unknown regime: " + s);
}

HyperParams theoretical_hparams(const SystemParams& params, Regime regime, long t0,
                                const TheoryConstants& k) {
  params.validate();
  const double beta = params.act.min_slope();
  require_positive_beta(beta, "theoretical_hparams");
  const auto n = static_cast<double>(params.n());
  const auto dim = static_cast<double>(params.n() + params.p());
  const double a_norm = spectral_norm(params.a);
  const double b_norm = spectral_norm(params.b);
  const double beta2 = beta * beta;

  HyperParams hp;
  if (regime == Regime::Unstable) {
    hp.rho = rho_unstable(params, t0);
    // μ = 1/√γ₊ with γ₊ = B_{T0}².
    hp.mu = 1.0 / b_t(a_norm, b_norm, t0);
    hp.eta = k.c0 * beta2 / (hp.rho * n * dim);
    hp.rate = 1.0 - k.c0 * beta2 * beta2 / (2.0 * hp.rho * hp.rho * n * dim);
    hp.n_min = static_cast<long>(std::ceil(k.C * hp.rho * hp.rho * dim));
    return hp;
  }
  if (regime == Regime::Odd && !params.act.is_odd()) {
    throw std::invalid_argument("theoretical_hparams: odd regime needs an odd activation");
  }
  hp.rho = rho_stable(params);
  hp.mu = 1.0 / b_inf(a_norm, b_norm);
  const double dim_factor = regime == Regime::Odd ? dim : n * dim;
  hp.eta = k.c0 * beta2 / (hp.rho * dim_factor);
  hp.rate = 1.0 - k.c0 * beta2 * beta2 / (2.0 * hp.rho * hp.rho * dim_factor);
  hp.window = truncation_length(params.n(), hp.rho, a_norm, k.c);
  hp.n_min = static_cast<long>(std::ceil(k.C * *hp.window * hp.rho * hp.rho * dim));
  return hp;
}

HyperParams general_hparams(const AssumptionParams& assumption, double beta, long n, long p,
                            double a_norm, const TheoryConstants& k) {
  assumption.validate();
  require_positive_beta(beta, "general_hparams");
  const auto dim = static_cast<double>(n + p);
  const double spread = (assumption.theta + std::sqrt(2.0)) * (assumption.theta + std::sqrt(2.0));
  HyperParams hp;
  hp.rho = assumption.gamma_plus / assumption.gamma_minus;
  hp.mu = 1.0 / std::sqrt(assumption.gamma_plus);
  hp.eta = k.c0 * beta * beta / (hp.rho * spread * dim);
  hp.rate = 1.0 - k.c0 * std::pow(beta, 4) / (2.0 * hp.rho * hp.rho * spread * dim);
  double window = 1.0;
  if (a_norm < 1.0 && k.c * n * hp.rho >= 1.0) {
    hp.window = truncation_length(n, hp.rho, a_norm, k.c);
    window = *hp.window;
  }
  hp.n_min = static_cast<long>(std::ceil(k.C * window * hp.rho * hp.rho * dim));
  return hp;
}

TheoryReport theory_report(const SystemParams& params, Regime regime, long t, long t0,
                           const TheoryConstants& k) {
  TheoryReport r;
  r.regime = regime;
  r.a_norm = spectral_norm(params.a);
  r.b_norm = spectral_norm(params.b);
  r.b_min = min_singular_value(params.b);
  r.beta = params.act.min_slope();
  r.t = t;
  r.b_t = b_t(r.a_norm, r.b_norm, t);
  if (r.a_norm < 1.0) r.b_inf = b_inf(r.a_norm, r.b_norm);
  r.t0 = t0;
  r.hparams = theoretical_hparams(params, regime, t0, k);
  r.constants = k;
  return r;
}

nlohmann::json to_json(const TheoryReport& r) {
  nlohmann::json j;
  j["regime"] = to_string(r.regime);
  j["a_norm"] = r.a_norm;
  j["b_norm"] = r.b_norm;
  j["b_min"] = r.b_min;
  j["beta"] = r.beta;
  j["t"] = r.t;
  j["B_t"] = r.b_t;
  j["B_inf"] = r.b_inf ? nlohmann::json(*r.b_inf) : nlohmann::json(nullptr);
  j["T0"] = r.t0;
  j["rho"] = r.hparams.rho;
  j["L"] = r.hparams.window ? nlohmann::json(*r.hparams.window) : nlohmann::json(nullptr);
  j["N_min"] = r.hparams.n_min;
  j["mu"] = r.hparams.mu;
  j["eta"] = r.hparams.eta;
  j["rate"] = r.hparams.rate;
  j["constants"] = {{"c", r.constants.c}, {"C", r.constants.C}, {"c0", r.constants.c0}};
  return j;
}

Matrix empirical_covariance(const Matrix& samples) {
  if (samples.cols() < 2) throw std::invalid_argument("empirical_covariance: need at least 2 samples");
  const Vector mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - mean;
  Matrix cov = centered * centered.transpose() / static_cast<double>(samples.cols());
  // Symmetrize away rounding.
  return 0.5 * (cov + cov.transpose());
}

DataMatrixCondition data_matrix_condition(const Matrix& rows) {
  if (rows.rows() < rows.cols()) {
    throw std::invalid_argument("data_matrix_condition: need at least as many rows as columns");
  }
  const Matrix gram = rows.transpose() * rows / static_cast<double>(rows.rows());
  const auto ext = symmetric_extremes(0.5 * (gram + gram.transpose()));
  return {ext.max, ext.min, rows.rowwise().norm().maxCoeff()};
}

DataMatrixCertificate certify_data_matrix(const Matrix& rows, double theta, double rho) {
  DataMatrixCertificate cert;
  cert.condition = data_matrix_condition(rows);
  cert.upper_bound = (theta + std::sqrt(2.0)) * (theta + std::sqrt(2.0));
  cert.lower_bound = 0.5 / rho;
  cert.row_constant = cert.condition.max_row_norm / std::sqrt(static_cast<double>(rows.cols()));
  cert.positive_definite = cert.condition.lambda_min > 0.0;
  cert.upper_ok = cert.condition.lambda_max <= cert.upper_bound;
  cert.lower_ok = cert.condition.lambda_min >= cert.lower_bound;
  return cert;
}

bool CovarianceReport::pass() const {
  return upper_ok && lower_ok.value_or(true) && miso_ok.value_or(true) && norm_ok &&
         mean_ok.value_or(true);
}

CovarianceReport covariance_bounds_check(const SystemParams& params, long t, long num_samples,
                                         std::uint64_t seed) {
  params.validate();
  if (num_samples < 1000) throw std::invalid_argument("covariance_bounds_check: need >= 1000 samples");
  if (t < 1) throw std::invalid_argument("covariance_bounds_check: t must be at least 1");
  const Eigen::Index n = params.n();
  const Eigen::Index p = params.p();

  CovarianceReport rep;
  rep.t = t;
  rep.samples = num_samples;

  Matrix states(n, num_samples);
  std::array<long, kBatches + 1> edges{};
  for (int b = 0; b <= kBatches; ++b) edges[b] = num_samples * b / kBatches;
  for (int b = 0; b < kBatches; ++b) {
    Rng rng = Rng::stream(seed, {stream_tag::kCheck, static_cast<std::uint64_t>(b)});
    Vector u(p);
    for (long s = edges[b]; s < edges[b + 1]; ++s) {
      Vector h = Vector::Zero(n);
      for (long step_index = 0; step_index < t; ++step_index) {
        for (Eigen::Index i = 0; i < p; ++i) u(i) = rng.normal();
        h = step(params, h, u);
      }
      states.col(s) = h;
    }
  }

  const Vector mean = states.rowwise().mean();
  std::array<double, kBatches> sq_norm{};
  for (int b = 0; b < kBatches; ++b) {
    sq_norm[b] = states.middleCols(edges[b], edges[b + 1] - edges[b]).colwise().squaredNorm().mean();
  }
  // Extreme eigenvectors from the first batches, Rayleigh quotients on each
  // of the remaining ones.
  const long split = edges[kDirectionBatches];
  const Matrix pilot = states.leftCols(split).colwise() - mean;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(pilot * pilot.transpose() / static_cast<double>(split));
  const Vector lo = eig.eigenvectors().col(0);
  const Vector hi = eig.eigenvectors().col(n - 1);
  std::array<double, kBatches - kDirectionBatches> eig_min{}, eig_max{};
  for (int b = kDirectionBatches; b < kBatches; ++b) {
    const Matrix centered = states.middleCols(edges[b], edges[b + 1] - edges[b]).colwise() - mean;
    eig_min[b - kDirectionBatches] = (lo.transpose() * centered).squaredNorm() / static_cast<double>(centered.cols());
    eig_max[b - kDirectionBatches] = (hi.transpose() * centered).squaredNorm() / static_cast<double>(centered.cols());
  }
  const Matrix cov = empirical_covariance(states);
  const auto plugin = symmetric_extremes(cov);
  rep.plugin_eig_min = plugin.min;
  rep.plugin_eig_max = plugin.max;
  const BatchStats lo_stats = batch_stats(eig_min);
  const BatchStats hi_stats = batch_stats(eig_max);
  rep.eig_min = lo_stats.mean;
  rep.eig_max = hi_stats.mean;
  rep.se_min = lo_stats.se;
  rep.se_max = hi_stats.se;
  rep.mean_sq_norm = states.colwise().squaredNorm().mean();
  rep.mean_sq_norm_se = batch_stats(sq_norm).se;

  const double a_norm = spectral_norm(params.a);
  const double b_norm = spectral_norm(params.b);
  const double beta = params.act.min_slope();
  const double bt = b_t(a_norm, b_norm, t);
  rep.upper_bound = bt * bt;
  const double s_min = min_singular_value(params.b);
  rep.lower_bound = beta * beta * s_min * s_min;
  rep.mean_sq_norm_bound = params.b.squaredNorm() * geometric_sum(a_norm * a_norm, t);

  rep.upper_ok = rep.eig_max <= rep.upper_bound + 3.0 * rep.se_max;
  rep.norm_ok = rep.mean_sq_norm <= rep.mean_sq_norm_bound + 3.0 * rep.mean_sq_norm_se;
  if (beta > 0.0) {
    rep.lower_ok = rep.eig_min >= rep.lower_bound - 3.0 * rep.se_min;
    if (n == 1) {
      // Σ_{i=1}^t (β^i |A|^{i−1} ‖B‖)²
      const double bound = beta * beta * b_norm * b_norm * geometric_sum(beta * beta * a_norm * a_norm, t);
      rep.miso_bound = bound;
      rep.miso_ok = rep.eig_min >= bound - 3.0 * rep.se_min;
    }
  }

  rep.mean_norm = mean.norm();
  rep.mean_tolerance = 3.0 * std::sqrt(cov.trace() / static_cast<double>(num_samples));
  if (params.act.is_odd()) rep.mean_ok = rep.mean_norm <= rep.mean_tolerance;
  return rep;
}

nlohmann::json to_json(const CovarianceReport& r) {
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"t", r.t},
          {"samples", r.samples},
          {"eig_min", r.eig_min},
          {"eig_max", r.eig_max},
          {"se_min", r.se_min},
          {"se_max", r.se_max},
          {"plugin_eig_min", r.plugin_eig_min},
          {"plugin_eig_max", r.plugin_eig_max},
          {"lower_bound", r.lower_bound},
          {"upper_bound", r.upper_bound},
          {"miso_bound", opt(r.miso_bound)},
          {"mean_sq_norm", r.mean_sq_norm},
          {"mean_sq_norm_bound", r.mean_sq_norm_bound},
          {"mean_norm", r.mean_norm},
          {"mean_tolerance", r.mean_tolerance},
          {"upper_ok", r.upper_ok},
          {"lower_ok", opt(r.lower_ok)},
          {"miso_ok", opt(r.miso_ok)},
          {"norm_ok", r.norm_ok},
          {"mean_ok", opt(r.mean_ok)},
          {"pass", r.pass()}};
}

}  // namespace nlsysid
