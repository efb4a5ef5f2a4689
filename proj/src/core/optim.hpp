#pragma once

#include <Eigen/Dense>
#include <functional>

namespace dkgp {

struct NelderMeadOptions {
  int max_iter = 2000;
  double x_tol = 1e-8;    // simplex diameter
  double f_tol = 1e-10;   // spread of function values
  double initial_step = 0.25;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill-simplex minimizer. The objective may return +inf / huge values for
// infeasible points; it must not throw. Standard reflect / expand / contract /
// shrink coefficients (1, 2, 0.5, 0.5).
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const NelderMeadOptions& opts = {});

}  // namespace dkgp
