#include "core/gp.hpp"

#include <cmath>
#include <sstream>

#include "core/errors.hpp"

namespace dkgp {

namespace {
constexpr double kLn2Pi = 1.8378770664093454836;
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.triangularView<Eigen::Lower>().transpose().solve(x);
}

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd x = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.triangularView<Eigen::Lower>().transpose().solve(x);
}

CholeskyFactor cholesky_with_jitter(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  if (n != m.cols()) throw InputError("cholesky_with_jitter: matrix not square");

  const double base = n > 0 ? 1e-8 * m.trace() / static_cast<double>(n) : 0.0;
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 6; ++attempt) {
    Eigen::MatrixXd a = m;
    if (jitter > 0.0) a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      CholeskyFactor f;
      f.lower = llt.matrixL();
      f.log_det = 2.0 * f.lower.diagonal().array().log().sum();
      f.jitter = jitter;
      if (std::isfinite(f.log_det)) return f;
    }
    jitter = attempt == 0 ? (base > 0.0 ? base : 1e-12) : jitter * 10.0;
  }
  std::ostringstream msg;
  msg << "non-PSD kernel matrix (n=" << n << ", final jitter=" << jitter / 10.0
      << ")";
  throw NumericError(msg.str());
}

void cholesky_append(CholeskyFactor& chol, const Eigen::VectorXd& cross_col,
                     double diag_value) {
  const Eigen::Index n = chol.lower.rows();
  if (cross_col.size() != n) {
    throw InputError("cholesky_append: cross column length mismatch");
  }
  Eigen::VectorXd l(n);
  if (n > 0) {
    l = chol.lower.triangularView<Eigen::Lower>().solve(cross_col);
  }
  const double d2 = diag_value + chol.jitter - l.squaredNorm();
  if (!(d2 > 0.0) || !std::isfinite(d2)) {
    throw NumericError("non-PSD kernel matrix on append (n=" +
                       std::to_string(n + 1) + ")");
  }
  chol.lower.conservativeResize(n + 1, n + 1);
  chol.lower.row(n).head(n) = l.transpose();
  chol.lower.col(n).head(n).setZero();
  chol.lower(n, n) = std::sqrt(d2);
  chol.log_det += std::log(d2);
}

GpPosterior gp_posterior(const Eigen::MatrixXd& k_train,
                         const Eigen::MatrixXd& k_cross,
                         const Eigen::VectorXd& k_test_diag,
                         const Eigen::VectorXd& y_train, double noise_var) {
  const Eigen::Index n = k_train.rows();
  const Eigen::Index m = k_test_diag.size();
  if (k_train.cols() != n) throw InputError("gp_posterior: k_train not square");
  if (y_train.size() != n) throw InputError("gp_posterior: y_train length mismatch");
  if (k_cross.rows() != m || (n > 0 && k_cross.cols() != n)) {
    throw InputError("gp_posterior: k_cross shape mismatch");
  }
  if (noise_var < 0.0) throw InputError("gp_posterior: negative noise variance");

  GpPosterior post;
  if (n == 0) {
    post.mean = Eigen::VectorXd::Zero(m);
    post.variance = k_test_diag.cwiseMax(0.0);
    return post;
  }

  Eigen::MatrixXd a = k_train;
  a.diagonal().array() += noise_var;
  const CholeskyFactor chol = cholesky_with_jitter(a);

  post.mean = k_cross * chol.solve(y_train);
  // v = L^-1 kc^T, var_j = ktd_j - ||v_j||^2
  Eigen::MatrixXd v =
      chol.lower.triangularView<Eigen::Lower>().solve(k_cross.transpose());
  post.variance =
      (k_test_diag - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
  return post;
}

NlmlResult nlml_and_grad(const Eigen::MatrixXd& k_train,
                         const Eigen::VectorXd& y_train, double noise_var) {
  const Eigen::Index n = k_train.rows();
  if (n < 1) throw InputError("nlml_and_grad: empty training set");
  if (k_train.cols() != n) throw InputError("nlml_and_grad: k_train not square");
  if (y_train.size() != n) throw InputError("nlml_and_grad: y_train length mismatch");

  Eigen::MatrixXd a = k_train;
  a.diagonal().array() += noise_var;
  const CholeskyFactor chol = cholesky_with_jitter(a);

  const Eigen::VectorXd alpha = chol.solve(y_train);
  NlmlResult res;
  res.value = 0.5 * y_train.dot(alpha) + 0.5 * chol.log_det +
              0.5 * static_cast<double>(n) * kLn2Pi;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a_inv = chol.solve(identity);
  res.grad = 0.5 * (a_inv - alpha * alpha.transpose());
  return res;
}

}  // namespace dkgp
