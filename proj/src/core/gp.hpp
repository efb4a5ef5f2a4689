#pragma once

#include <Eigen/Dense>

namespace dkgp {

// Lower-triangular Cholesky factor of a (possibly jittered) covariance
// matrix, plus the log-determinant of the factored matrix.
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double log_det = 0.0;
  double jitter = 0.0;  // total diagonal jitter that was required

  // Solve (L L^T) x = b.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
};

// Factor `m` (symmetric), escalating diagonal jitter on failure: the first
// retry adds 1e-8 * trace/n, each further retry multiplies by 10, at most
// six jittered attempts. Throws NumericError naming the size and final
// jitter when the matrix still is not positive definite.
CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& m);

// Grow the factor of A (n x n) into the factor of [[A, c], [c^T, d]], where
// `cross_col` is c and `diag_value` is d; the factor's stored jitter is added
// to d so appended rows match the jittered matrix. O(n^2). Throws
// NumericError when the extended matrix is not positive definite.
void cholesky_append(CholeskyFactor& chol, const Eigen::VectorXd& cross_col,
                     double diag_value);

// Posterior of an exact GP at test points, diagonal covariance only.
struct GpPosterior {
  Eigen::VectorXd mean;      // predictive means, prior mean fixed at zero
  Eigen::VectorXd variance;  // predictive variances, clamped at >= 0
};

// mean = Kc (Kt + noise I)^-1 y ; var_j = ktd_j - kc_j (Kt + noise I)^-1 kc_j^T.
// `k_train` is n x n, `k_cross` is m x n, `k_test_diag` length m; an empty
// training set returns the prior (zero mean, k_test_diag variance).
GpPosterior gp_posterior(const Eigen::MatrixXd& k_train,
                         const Eigen::MatrixXd& k_cross,
                         const Eigen::VectorXd& k_test_diag,
                         const Eigen::VectorXd& y_train, double noise_var);

// Negative log marginal likelihood of y under N(0, k_train + noise I) and
// its gradient with respect to every entry of that matrix:
//   nlml = 1/2 y^T A^-1 y + 1/2 ln|A| + n/2 ln(2 pi)
//   d nlml / dA = 1/2 (A^-1 - alpha alpha^T),  alpha = A^-1 y.
struct NlmlResult {
  double value = 0.0;
  Eigen::MatrixXd grad;
};

NlmlResult nlml_and_grad(const Eigen::MatrixXd& k_train,
                         const Eigen::VectorXd& y_train, double noise_var);

}  // namespace dkgp
