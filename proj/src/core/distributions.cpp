#include "core/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace dkgp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2Pi = 1.8378770664093454836;

// --- symmetric standardized Student-t helpers -------------------------------
//
// f(u) = s * t_nu(s * u) with s = sqrt(nu / (nu - 2)) has unit variance.

double t_scale(double nu) { return std::sqrt(nu / (nu - 2.0)); }

double t_logpdf_raw(double nu, double x) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * kPi) -
         0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double t_cdf_raw(double nu, double x) {
  if (x == 0.0) return 0.5;
  const double x2 = x * x;
  // Two algebraically equal forms; pick the one whose beta argument stays
  // far from 1 so it doesn't round to the boundary and flatten the center.
  if (x2 > nu) {
    const double ib =
        regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + x2));
    return x > 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
  }
  const double ib =
      regularized_incomplete_beta(0.5, 0.5 * nu, x2 / (nu + x2));
  return x > 0.0 ? 0.5 + 0.5 * ib : 0.5 - 0.5 * ib;
}

double std_t_logpdf(double nu, double v) {
  const double s = t_scale(nu);
  return std::log(s) + t_logpdf_raw(nu, s * v);
}

double std_t_cdf(double nu, double v) { return t_cdf_raw(nu, t_scale(nu) * v); }

// E|v| of the unit-variance t: 2*sqrt(nu-2)*Gamma((nu+1)/2) / (sqrt(pi)*(nu-1)*Gamma(nu/2)).
double std_t_abs_mean(double nu) {
  return 2.0 * std::sqrt(nu - 2.0) *
         std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
         (std::sqrt(kPi) * (nu - 1.0));
}

// Upper partial first moment of the unit-variance t: P1(c) = int_c^inf u f(u) du.
// Uses the antiderivative of w * t_nu(w): -nu/(nu-1) * (1 + w^2/nu) * t_nu(w).
double std_t_partial_moment(double nu, double c) {
  const double s = t_scale(nu);
  const double w = s * c;
  return (1.0 / s) * nu / (nu - 1.0) * (1.0 + w * w / nu) *
         std::exp(t_logpdf_raw(nu, w));
}

// --- Fernandez-Steel skew-t, standardized to zero mean / unit variance ------
//
// Built on the unit-variance symmetric t density f:
//   g(z) = 2/(xi + 1/xi) * [ f(z/xi) for z >= 0 ; f(xi*z) for z < 0 ]
//   v = (z - mu_xi) / sigma_xi  with the relocation constants below.

struct SkewTConsts {
  double m1;     // E|Z| of the symmetric base
  double mu;     // mean of g
  double sigma;  // std dev of g
};

SkewTConsts skew_t_consts(double nu, double xi) {
  SkewTConsts c;
  c.m1 = std_t_abs_mean(nu);
  const double xi_inv = 1.0 / xi;
  c.mu = c.m1 * (xi - xi_inv);
  const double second = xi * xi + xi_inv * xi_inv - 1.0;
  c.sigma = std::sqrt(second - c.mu * c.mu);
  return c;
}

double skew_t_logpdf(double nu, double xi, double v) {
  const SkewTConsts c = skew_t_consts(nu, xi);
  const double z = c.sigma * v + c.mu;
  const double norm = std::log(2.0 / (xi + 1.0 / xi));
  const double body =
      z >= 0.0 ? std_t_logpdf(nu, z / xi) : std_t_logpdf(nu, xi * z);
  return std::log(c.sigma) + norm + body;
}

double skew_t_cdf(double nu, double xi, double v) {
  const SkewTConsts c = skew_t_consts(nu, xi);
  const double z = c.sigma * v + c.mu;
  const double xi2 = xi * xi;
  if (z <= 0.0) return 2.0 / (1.0 + xi2) * std_t_cdf(nu, xi * z);
  return 1.0 / (1.0 + xi2) +
         (2.0 * xi2 / (1.0 + xi2)) * (std_t_cdf(nu, z / xi) - 0.5);
}

// E|v| = E|z - mu_xi| / sigma_xi. With xi >= 1 the mean sits in the
// right branch where g(z) = C f(z/xi); the family is mirror-symmetric in
// xi <-> 1/xi, so smaller xi reduces to the reflected case.
double skew_t_abs_mean(double nu, double xi) {
  const double x = std::max(xi, 1.0 / xi);
  const SkewTConsts c = skew_t_consts(nu, x);
  const double cnorm = 2.0 / (x + 1.0 / x);
  const double a = c.mu / x;
  const double tail = x * x * std_t_partial_moment(nu, a) -
                      c.mu * x * (1.0 - std_t_cdf(nu, a));
  return 2.0 * cnorm * tail / c.sigma;
}

}  // namespace

const char* innovation_dist_name(InnovationDist d) {
  switch (d) {
    case InnovationDist::normal: return "norm";
    case InnovationDist::student_t: return "std";
    case InnovationDist::skew_t: return "sstd";
  }
  return "?";
}

InnovationDist innovation_dist_from_name(const std::string& name) {
  if (name == "norm") return InnovationDist::normal;
  if (name == "std") return InnovationDist::student_t;
  if (name == "sstd") return InnovationDist::skew_t;
  throw InputError("unknown innovation distribution: " + name);
}

bool innovation_params_valid(InnovationDist dist, const DistParams& p) {
  switch (dist) {
    case InnovationDist::normal:
      return true;
    case InnovationDist::student_t:
      return std::isfinite(p.nu) && p.nu > 2.0;
    case InnovationDist::skew_t:
      return std::isfinite(p.nu) && p.nu > 2.0 && std::isfinite(p.skew) &&
             p.skew > 0.0;
  }
  return false;
}

double innovation_logpdf(InnovationDist dist, const DistParams& p, double v) {
  switch (dist) {
    case InnovationDist::normal:
      return -0.5 * v * v - 0.5 * kLn2Pi;
    case InnovationDist::student_t:
      return std_t_logpdf(p.nu, v);
    case InnovationDist::skew_t:
      return skew_t_logpdf(p.nu, p.skew, v);
  }
  return -std::numeric_limits<double>::infinity();
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double innovation_cdf(InnovationDist dist, const DistParams& p, double v) {
  switch (dist) {
    case InnovationDist::normal:
      return normal_cdf(v);
    case InnovationDist::student_t:
      return std_t_cdf(p.nu, v);
    case InnovationDist::skew_t:
      return skew_t_cdf(p.nu, p.skew, v);
  }
  return 0.0;
}

double innovation_quantile(InnovationDist dist, const DistParams& p,
                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("innovation_quantile: alpha must lie in (0, 1)");
  }
  if (!innovation_params_valid(dist, p)) {
    throw InputError("innovation_quantile: invalid distribution parameters");
  }
  // Expand a bracket, then bisect to 1e-10.
  double lo = -64.0, hi = 64.0;
  while (innovation_cdf(dist, p, lo) > alpha && lo > -1e12) lo *= 2.0;
  while (innovation_cdf(dist, p, hi) < alpha && hi < 1e12) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (innovation_cdf(dist, p, mid) < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double innovation_abs_mean(InnovationDist dist, const DistParams& p) {
  switch (dist) {
    case InnovationDist::normal:
      return std::sqrt(2.0 / kPi);
    case InnovationDist::student_t:
      return std_t_abs_mean(p.nu);
    case InnovationDist::skew_t:
      return skew_t_abs_mean(p.nu, p.skew);
  }
  return 0.0;
}

// Continued-fraction evaluation (modified Lentz); relative accuracy ~1e-15.
double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) -
                          std::log(a) -
                          (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  if (x > (a + 1.0) / (a + b + 2.0)) {
    return 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
  }
  const double tiny = 1e-300;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double cf = d;
  for (int m = 1; m <= 300; ++m) {
    const double md = static_cast<double>(m);
    // even step
    double num = md * (b - md) * x / ((a + 2.0 * md - 1.0) * (a + 2.0 * md));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    cf *= d * c;
    // odd step
    num = -(a + md) * (a + b + md) * x /
          ((a + 2.0 * md) * (a + 2.0 * md + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    cf *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(ln_front) * cf;
}

}  // namespace dkgp
