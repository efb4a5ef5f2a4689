#include "core/garch.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "core/errors.hpp"
#include "core/optim.hpp"
#include "core/rng.hpp"

namespace dkgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sample_variance(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw InputError("sample_variance: need at least 2 points");
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(n - 1);
}

// Number of free coordinates in the unconstrained parameterization.
int free_dim(const GarchSpec& spec) {
  int d = 0;
  switch (spec.family) {
    case GarchFamily::sgarch: d = 4; break;  // mu, ln k0, persistence, split
    case GarchFamily::gjr: d = 5; break;     // + third simplex coordinate
    case GarchFamily::egarch: d = 5; break;  // mu, a0, a1, g1, atanh beta1
  }
  if (spec.dist == InnovationDist::student_t) d += 1;
  if (spec.dist == InnovationDist::skew_t) d += 2;
  return d;
}

// Map an unconstrained vector to feasible parameters. Every image satisfies
// garch_params_valid, so the optimizer can roam freely.
GarchParams decode(const GarchSpec& spec, const Eigen::VectorXd& theta) {
  GarchParams p;
  int i = 0;
  p.mu = theta[i++];
  switch (spec.family) {
    case GarchFamily::sgarch: {
      p.k0 = std::exp(theta[i++]);
      const double s = sigmoid(theta[i++]);  // alpha1 + rho1 in (0,1)
      const double w = sigmoid(theta[i++]);
      p.alpha1 = s * w;
      p.rho1 = s * (1.0 - w);
      break;
    }
    case GarchFamily::gjr: {
      p.k0 = std::exp(theta[i++]);
      const double s = sigmoid(theta[i++]);  // alpha1 + rho1 + gamma/2
      const double z1 = theta[i++];
      const double z2 = theta[i++];
      const double m = std::max({z1, z2, 0.0});
      const double e1 = std::exp(z1 - m);
      const double e2 = std::exp(z2 - m);
      const double e3 = std::exp(-m);
      const double denom = e1 + e2 + e3;
      p.alpha1 = s * e1 / denom;
      p.rho1 = s * e2 / denom;
      p.gamma = 2.0 * s * e3 / denom;
      break;
    }
    case GarchFamily::egarch: {
      p.alpha0 = theta[i++];
      p.alpha1 = theta[i++];
      p.gamma1 = theta[i++];
      p.beta1 = std::tanh(theta[i++]);
      break;
    }
  }
  if (spec.dist == InnovationDist::student_t ||
      spec.dist == InnovationDist::skew_t) {
    p.dist.nu = 2.0 + std::exp(theta[i++]);
  }
  if (spec.dist == InnovationDist::skew_t) {
    p.dist.skew = std::exp(theta[i++]);
  }
  return p;
}

// Inverse of decode for building start points from natural values.
Eigen::VectorXd encode(const GarchSpec& spec, const GarchParams& p) {
  Eigen::VectorXd theta(free_dim(spec));
  auto logit = [](double x) { return std::log(x / (1.0 - x)); };
  int i = 0;
  theta[i++] = p.mu;
  switch (spec.family) {
    case GarchFamily::sgarch: {
      theta[i++] = std::log(p.k0);
      const double s = p.alpha1 + p.rho1;
      theta[i++] = logit(s);
      theta[i++] = logit(p.alpha1 / s);
      break;
    }
    case GarchFamily::gjr: {
      theta[i++] = std::log(p.k0);
      const double s = p.alpha1 + p.rho1 + 0.5 * p.gamma;
      theta[i++] = logit(s);
      const double w3 = 0.5 * p.gamma / s;
      theta[i++] = std::log(p.alpha1 / s) - std::log(w3);
      theta[i++] = std::log(p.rho1 / s) - std::log(w3);
      break;
    }
    case GarchFamily::egarch: {
      theta[i++] = p.alpha0;
      theta[i++] = p.alpha1;
      theta[i++] = p.gamma1;
      theta[i++] = std::atanh(p.beta1);
      break;
    }
  }
  if (spec.dist == InnovationDist::student_t ||
      spec.dist == InnovationDist::skew_t) {
    theta[i++] = std::log(p.dist.nu - 2.0);
  }
  if (spec.dist == InnovationDist::skew_t) {
    theta[i++] = std::log(p.dist.skew);
  }
  return theta;
}

}  // namespace

std::string garch_family_name(GarchFamily family) {
  switch (family) {
    case GarchFamily::sgarch: return "sgarch";
    case GarchFamily::egarch: return "egarch";
    case GarchFamily::gjr: return "gjr";
  }
  return "?";
}

bool garch_params_valid(const GarchSpec& spec, const GarchParams& params) {
  if (!std::isfinite(params.mu)) return false;
  if (!innovation_params_valid(spec.dist, params.dist)) return false;
  switch (spec.family) {
    case GarchFamily::sgarch:
      return params.k0 > 0.0 && params.alpha1 >= 0.0 && params.rho1 >= 0.0 &&
             params.alpha1 + params.rho1 < 1.0;
    case GarchFamily::gjr:
      return params.k0 > 0.0 && params.alpha1 >= 0.0 && params.rho1 >= 0.0 &&
             params.alpha1 + params.gamma >= 0.0 &&
             params.alpha1 + params.rho1 + 0.5 * params.gamma < 1.0;
    case GarchFamily::egarch:
      return std::isfinite(params.alpha0) && std::isfinite(params.alpha1) &&
             std::isfinite(params.gamma1) && std::abs(params.beta1) < 1.0;
  }
  return false;
}

double garch_step(const GarchSpec& spec, const GarchParams& params,
                  double h_prev, double eps_prev, double e_abs_mean) {
  switch (spec.family) {
    case GarchFamily::sgarch:
      return params.k0 + params.rho1 * h_prev +
             params.alpha1 * eps_prev * eps_prev;
    case GarchFamily::gjr: {
      double h = params.k0 + params.rho1 * h_prev +
                 params.alpha1 * eps_prev * eps_prev;
      if (eps_prev < 0.0) h += params.gamma * eps_prev * eps_prev;
      return h;
    }
    case GarchFamily::egarch: {
      const double v = eps_prev / std::sqrt(h_prev);
      const double ln_h = params.alpha0 + params.alpha1 * v +
                          params.gamma1 * (std::abs(v) - e_abs_mean) +
                          params.beta1 * std::log(h_prev);
      return std::exp(ln_h);
    }
  }
  return 0.0;
}

Eigen::VectorXd variance_filter(const GarchSpec& spec,
                                const GarchParams& params,
                                const Eigen::VectorXd& returns) {
  const Eigen::Index n = returns.size();
  if (n < 2) throw InputError("variance_filter: need at least 2 returns");

  const Eigen::VectorXd eps = returns.array() - params.mu;
  const double e_abs_mean = spec.family == GarchFamily::egarch
                                ? innovation_abs_mean(spec.dist, params.dist)
                                : 0.0;

  Eigen::VectorXd h(n);
  h[0] = sample_variance(eps);
  if (!(h[0] > 0.0) || !std::isfinite(h[0])) {
    throw NumericError("variance underflow at index 0");
  }
  for (Eigen::Index t = 1; t < n; ++t) {
    h[t] = garch_step(spec, params, h[t - 1], eps[t - 1], e_abs_mean);
    if (!(h[t] > 0.0) || !std::isfinite(h[t])) {
      throw NumericError("variance underflow at index " + std::to_string(t));
    }
  }
  return h;
}

double garch_log_likelihood(const GarchSpec& spec, const GarchParams& params,
                            const Eigen::VectorXd& returns) {
  if (!garch_params_valid(spec, params)) return kNegInf;
  Eigen::VectorXd h;
  try {
    h = variance_filter(spec, params, returns);
  } catch (const NumericError&) {
    return kNegInf;
  }
  const Eigen::VectorXd eps = returns.array() - params.mu;
  double ll = 0.0;
  for (Eigen::Index t = 0; t < returns.size(); ++t) {
    const double z = eps[t] / std::sqrt(h[t]);
    ll += innovation_logpdf(spec.dist, params.dist, z) - 0.5 * std::log(h[t]);
  }
  return std::isfinite(ll) ? ll : kNegInf;
}

GarchFit fit_mle(const GarchSpec& spec, const Eigen::VectorXd& returns,
                 std::uint64_t seed, int restarts) {
  if (returns.size() < 50) {
    throw InputError("fit_mle: need at least 50 returns");
  }
  if (restarts < 1) throw InputError("fit_mle: restarts must be >= 1");

  const double var = sample_variance(returns);

  // Natural-units default start: mild persistence, unconditional variance
  // matched to the sample.
  GarchParams start;
  start.mu = returns.mean();
  start.dist.nu = 8.0;
  start.dist.skew = 1.0;
  switch (spec.family) {
    case GarchFamily::sgarch:
      start.alpha1 = 0.05;
      start.rho1 = 0.85;
      start.k0 = var * (1.0 - start.alpha1 - start.rho1);
      break;
    case GarchFamily::gjr:
      start.alpha1 = 0.05;
      start.rho1 = 0.80;
      start.gamma = 0.05;
      start.k0 =
          var * (1.0 - start.alpha1 - start.rho1 - 0.5 * start.gamma);
      break;
    case GarchFamily::egarch:
      start.beta1 = 0.9;
      start.alpha1 = 0.0;
      start.gamma1 = 0.1;
      start.alpha0 = (1.0 - start.beta1) * std::log(var);
      break;
  }
  const Eigen::VectorXd theta0 = encode(spec, start);

  auto objective = [&](const Eigen::VectorXd& theta) {
    return -garch_log_likelihood(spec, decode(spec, theta), returns);
  };

  NelderMeadOptions opts;
  opts.max_iter = 4000;
  opts.x_tol = 1e-7;
  opts.f_tol = 1e-9;

  Rng rng(seed);
  bool have_best = false;
  NelderMeadResult best;
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta = theta0;
    if (r > 0) {
      for (Eigen::Index i = 0; i < theta.size(); ++i)
        theta[i] += 0.5 * rng.normal();
    }
    const NelderMeadResult res = nelder_mead(objective, theta, opts);
    if (!std::isfinite(res.value)) continue;
    if (!have_best || res.value < best.value) {
      best = res;
      have_best = true;
    }
  }
  if (!have_best) throw NumericError("estimation failed");

  GarchFit fit;
  fit.spec = spec;
  fit.params = decode(spec, best.x);
  fit.variances = variance_filter(spec, fit.params, returns);
  fit.log_likelihood = -best.value;
  fit.converged = best.converged && std::isfinite(fit.log_likelihood);
  return fit;
}

GarchForecast forecast_one_step(const GarchFit& fit,
                                const Eigen::VectorXd& returns) {
  const Eigen::Index n = returns.size();
  if (n < 2) throw InputError("forecast_one_step: need at least 2 returns");
  const Eigen::VectorXd h = variance_filter(fit.spec, fit.params, returns);
  const double eps_last = returns[n - 1] - fit.params.mu;
  const double e_abs_mean =
      fit.spec.family == GarchFamily::egarch
          ? innovation_abs_mean(fit.spec.dist, fit.params.dist)
          : 0.0;
  const double h_next =
      garch_step(fit.spec, fit.params, h[n - 1], eps_last, e_abs_mean);
  if (!(h_next > 0.0) || !std::isfinite(h_next)) {
    throw NumericError("variance underflow at index " + std::to_string(n));
  }
  GarchForecast f;
  f.mu = fit.params.mu;
  f.sigma = std::sqrt(h_next);
  return f;
}

}  // namespace dkgp
