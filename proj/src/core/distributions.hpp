#pragma once

#include <string>

namespace dkgp {

// Innovation law of a volatility model's standardized shock v_t, with
// E[v] = 0 and Var[v] = 1 for every parameter setting.
enum class InnovationDist { normal, student_t, skew_t };

const char* innovation_dist_name(InnovationDist d);
InnovationDist innovation_dist_from_name(const std::string& name);

// Parameters of the innovation law. `nu` (> 2) applies to student_t and
// skew_t; `skew` (> 0) applies to skew_t only (Fernandez-Steel xi; 1 = symmetric).
struct DistParams {
  double nu = 0.0;
  double skew = 1.0;
};

// log density of the standardized innovation at v.
double innovation_logpdf(InnovationDist dist, const DistParams& p, double v);

// cumulative distribution function of the standardized innovation.
double innovation_cdf(InnovationDist dist, const DistParams& p, double v);

// alpha-quantile via monotone bisection on the CDF, resolved to 1e-10.
double innovation_quantile(InnovationDist dist, const DistParams& p, double alpha);

// E|v| of the standardized innovation (closed form), used by the
// exponential-GARCH size term.
double innovation_abs_mean(InnovationDist dist, const DistParams& p);

// true when the parameters satisfy the distribution's constraints
// (nu > 2 where used, skew > 0 where used, all finite).
bool innovation_params_valid(InnovationDist dist, const DistParams& p);

// Regularized incomplete beta I_x(a, b); standard continued-fraction
// evaluation, exposed for the Student-t CDF and reused by tests.
double regularized_incomplete_beta(double a, double b, double x);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace dkgp
