#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "core/distributions.hpp"

namespace dkgp {

enum class GarchFamily { sgarch, egarch, gjr };

// One of the nine benchmark variance models: family x innovation
// distribution, order fixed at p = q = 1.
struct GarchSpec {
  GarchFamily family = GarchFamily::sgarch;
  InnovationDist dist = InnovationDist::normal;
  int p = 1;
  int q = 1;
};

std::string garch_family_name(GarchFamily family);

struct GarchParams {
  double mu = 0.0;  // mean-equation constant, return units

  // sgarch / gjr variance equation.
  double k0 = 0.0;
  double alpha1 = 0.0;
  double rho1 = 0.0;
  double gamma = 0.0;  // gjr leverage on negative shocks

  // egarch log-variance equation.
  double alpha0 = 0.0;
  double gamma1 = 0.0;
  double beta1 = 0.0;

  DistParams dist;  // nu / skew where the innovation law needs them
};

// Stationarity / positivity constraints per family plus distribution-domain
// checks. Infeasible parameters make the likelihood -inf rather than raising.
bool garch_params_valid(const GarchSpec& spec, const GarchParams& params);

// Conditional variances h_t over the sample, same length as `returns`.
// h_0 is the sample variance of the de-meaned series; each later step applies
// the family recursion to the previous (h, eps) pair.
Eigen::VectorXd variance_filter(const GarchSpec& spec,
                                const GarchParams& params,
                                const Eigen::VectorXd& returns);

// One application of the variance recursion. `e_abs_mean` is E|v| of the
// standardized innovation (egarch only; ignored otherwise).
double garch_step(const GarchSpec& spec, const GarchParams& params,
                  double h_prev, double eps_prev, double e_abs_mean);

// Gaussian/t/skew-t likelihood of the de-meaned returns under the filtered
// variances: sum_t [ln f(eps_t / sqrt(h_t)) - 0.5 ln h_t]. Returns -inf for
// infeasible parameters or a filter that loses positivity; never throws for
// bad parameter values.
double garch_log_likelihood(const GarchSpec& spec, const GarchParams& params,
                            const Eigen::VectorXd& returns);

struct GarchFit {
  GarchSpec spec;
  GarchParams params;
  Eigen::VectorXd variances;  // filtered h_t at the fitted params
  double log_likelihood = 0.0;
  bool converged = false;
};

// Maximum likelihood via derivative-free simplex search over unconstrained
// transforms of the parameters, with `restarts` randomized starts (seeded for
// reproducibility). Throws InputError for series shorter than 50 and
// NumericError if every restart fails to reach a finite likelihood.
GarchFit fit_mle(const GarchSpec& spec, const Eigen::VectorXd& returns,
                 std::uint64_t seed = 0x9e3779b97f4a7c15ull, int restarts = 5);

struct GarchForecast {
  double mu = 0.0;
  double sigma = 0.0;
};

// One-step-ahead conditional mean and volatility: mu is the fitted constant,
// sigma = sqrt(h_{T+1}) from one more turn of the recursion.
GarchForecast forecast_one_step(const GarchFit& fit,
                                const Eigen::VectorXd& returns);

}  // namespace dkgp
