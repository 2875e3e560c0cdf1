#include "nlsysid/battery.hpp"

#include <cmath>
#include <sstream>

#include "nlsysid/rng.hpp"
#include "nlsysid/simulator.hpp"

namespace nlsysid {

namespace {

bool smooth_point(const ParamMatrix& theta, const Vector& x, double margin) {
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    if (std::abs(theta.row(i).dot(x)) <= margin) return false;
  }
  return true;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<CheckReport> gradient_suite(const std::vector<Activation>& acts, std::uint64_t seed,
                                        const GradientSuiteOptions& opt) {
  std::vector<CheckReport> out;
  const Eigen::Index d = opt.n + opt.p;
  for (std::size_t k = 0; k < acts.size(); ++k) {
    const Activation& act = acts[k];
    Rng rng = Rng::stream(seed, {stream_tag::kCheck, k});
    CheckReport rep;
    rep.name = "gradient_fd/" + act.label();
    rep.tolerance = 0.0;
    int drawn = 0;
    while (drawn < opt.points) {
      ParamMatrix theta(opt.n, d);
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = rng.normal();
      Vector x = gaussian_inputs(d, 1, rng).col(0);
      Vector y = gaussian_inputs(opt.n, 1, rng).col(0);
      if (!smooth_point(theta, x, opt.kink_margin)) continue;
      const ParamMatrix g = grad_single(theta, x, y, act);
      const ParamMatrix fd = finite_diff_grad(theta, x, y, act, opt.step);
      const double diff = (g - fd).norm();
      const double scale = g.norm();
      rep.add(diff == 0.0 ? 0.0 : diff / scale, opt.tolerance);
      ++drawn;
    }
    rep.samples_used = opt.points;
    rep.detail = "relative Frobenius error, step " + fmt(opt.step);
    rep.finalize();
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<CheckReport> deterministic_suite(std::uint64_t seed, const DeterministicSuiteOptions& opt) {
  const std::vector<Activation> acts = {Activation::linear(), Activation::relu(), Activation::leaky_relu(0.25),
                                        Activation::leaky_relu(0.5)};
  std::vector<CheckReport> out;
  for (int s = 0; s < opt.systems; ++s) {
    const auto idx = static_cast<std::uint64_t>(s);
    Rng rng = Rng::stream(seed, {stream_tag::kSystem, idx});
    const double a_norm = opt.a_norms[static_cast<std::size_t>(s) % opt.a_norms.size()];
    const Activation& act = acts[static_cast<std::size_t>(s) % acts.size()];
    const SystemParams params = random_system(opt.n, opt.p, a_norm, rng, act);
    const Matrix inputs = gaussian_inputs(opt.p, opt.horizon, rng);
    const std::string tag = "system " + std::to_string(s) + " (" + act.label() + ", ||A||=" + fmt(a_norm) + ")";

    CheckReport trunc;
    trunc.name = "truncation/" + std::to_string(s);
    trunc.tolerance = 1e-9;
    for (Eigen::Index window = 0; window <= opt.max_window; ++window) {
      const CheckReport r = check_truncation(params, inputs, window);
      trunc.observed.insert(trunc.observed.end(), r.observed.begin(), r.observed.end());
      trunc.bound.insert(trunc.bound.end(), r.bound.begin(), r.bound.end());
      trunc.samples_used += r.samples_used;
    }
    trunc.detail = tag + ", L = 0.." + std::to_string(opt.max_window);
    trunc.finalize();
    out.push_back(std::move(trunc));

    CheckReport lip;
    lip.name = "lipschitz_input/" + std::to_string(s);
    lip.tolerance = 1e-9;
    for (int k = 0; k < opt.perturbations; ++k) {
      const auto tau = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(opt.horizon)));
      Vector delta = gaussian_inputs(opt.p, 1, rng).col(0) * std::exp(rng.normal());
      const CheckReport r = check_lipschitz_input(params, inputs, tau, delta);
      lip.observed.insert(lip.observed.end(), r.observed.begin(), r.observed.end());
      lip.bound.insert(lip.bound.end(), r.bound.begin(), r.bound.end());
      lip.samples_used += r.samples_used;
    }
    lip.detail = tag + ", " + std::to_string(opt.perturbations) + " perturbations";
    lip.finalize();
    out.push_back(std::move(lip));

    CheckReport indep;
    indep.name = "independence/" + std::to_string(s);
    indep.tolerance = 0.0;
    for (std::size_t k = 0; k < opt.rates.size(); ++k) {
      const Eigen::Index rate = opt.rates[k];
      const auto offset = static_cast<Eigen::Index>(1 + rng.index(static_cast<std::size_t>(rate)));
      const CheckReport r = check_independence_structure(params, rate, offset, opt.independence_trials,
                                                         mix_seed(seed ^ (idx << 8) ^ k));
      indep.observed.insert(indep.observed.end(), r.observed.begin(), r.observed.end());
      indep.bound.insert(indep.bound.end(), r.bound.begin(), r.bound.end());
      indep.samples_used += r.samples_used;
    }
    indep.detail = tag;
    indep.finalize();
    out.push_back(std::move(indep));
  }
  return out;
}

CheckReport to_check(const CovarianceReport& rep, const std::string& name) {
  CheckReport c;
  c.name = name;
  c.tolerance = 0.0;
  c.samples_used = rep.samples;
  c.add(rep.eig_max, rep.upper_bound + 3.0 * rep.se_max);
  c.add(rep.mean_sq_norm, rep.mean_sq_norm_bound + 3.0 * rep.mean_sq_norm_se);
  std::ostringstream os;
  os << "entries: eig_max<=B_t^2, E|h|^2 bound";
  if (rep.lower_ok) {
    c.add(-rep.eig_min, -(rep.lower_bound - 3.0 * rep.se_min));
    os << ", eig_min>=beta^2 s_min(BB^T)";
  }
  if (rep.miso_ok) {
    c.add(-rep.eig_min, -(*rep.miso_bound - 3.0 * rep.se_min));
    os << ", variance>=MISO bound";
  }
  if (rep.mean_ok) {
    c.add(rep.mean_norm, rep.mean_tolerance);
    os << ", |mean|<=3SE";
  }
  c.detail = os.str();
  c.finalize();
  return c;
}

std::vector<CovarianceReport> covariance_suite(std::uint64_t seed, const CovarianceSuiteOptions& opt,
                                               std::vector<std::string>* names) {
  std::vector<CovarianceReport> out;
  std::uint64_t k = 0;
  for (double beta : opt.betas) {
    const Activation act = beta == 1.0 ? Activation::linear() : Activation::leaky_relu(beta);
    for (double a_norm : opt.a_norms) {
      for (Eigen::Index n : opt.dims) {
        Rng rng = Rng::stream(seed, {stream_tag::kSystem, k++});
        const SystemParams params = random_system(n, n, a_norm, rng, act);
        for (long t : opt.times) {
          const std::uint64_t check_seed =
              Rng::stream(seed, {stream_tag::kCheck, k, static_cast<std::uint64_t>(t)}).engine()();
          out.push_back(covariance_bounds_check(params, t, opt.samples, check_seed));
          if (names) {
            names->push_back("covariance/" + act.label() + "/a=" + fmt(a_norm) + "/n=" + std::to_string(n) +
                             "/t=" + std::to_string(t));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace nlsysid
