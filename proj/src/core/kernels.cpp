#include "core/kernels.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace dkgp {

RbfHyperparams RbfHyperparams::from_natural(double length_scale,
                                            double signal_var,
                                            double noise_var) {
  if (!(length_scale > 0.0) || !(signal_var > 0.0) || !(noise_var > 0.0)) {
    throw InputError("RbfHyperparams: natural parameters must be positive");
  }
  RbfHyperparams hp;
  hp.log_length_scale = std::log(length_scale);
  hp.log_signal_var = std::log(signal_var);
  hp.log_noise_var = std::log(noise_var);
  return hp;
}

double RbfHyperparams::length_scale() const {
  return std::exp(log_length_scale);
}
double RbfHyperparams::signal_var() const { return std::exp(log_signal_var); }
double RbfHyperparams::noise_var() const { return std::exp(log_noise_var); }

double rbf_eval(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj,
                const RbfHyperparams& hp, bool add_noise_if_same) {
  if (xi.size() != xj.size()) {
    throw InputError("rbf_eval: dimension mismatch");
  }
  const double l = hp.length_scale();
  const double r2 = (xi - xj).squaredNorm();
  double k = hp.signal_var() * std::exp(-r2 / (2.0 * l * l));
  if (add_noise_if_same && r2 == 0.0) k += hp.noise_var();
  return k;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b,
                              const RbfHyperparams& hp, bool add_noise) {
  if (a.cols() != b.cols()) {
    throw InputError("kernel_matrix: feature dimension mismatch");
  }
  const double l = hp.length_scale();
  const double sf2 = hp.signal_var();
  const double inv_2l2 = 1.0 / (2.0 * l * l);

  // |ai - bj|^2 = |ai|^2 + |bj|^2 - 2 ai.bj, computed blockwise.
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (a * b.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  d2 = d2.cwiseMax(0.0);  // clip the tiny negatives from cancellation

  Eigen::MatrixXd k = (sf2 * (-inv_2l2 * d2.array()).exp()).matrix();
  if (add_noise) {
    if (a.rows() != b.rows()) {
      throw InputError("kernel_matrix: noise requires a square block");
    }
    k.diagonal().array() += hp.noise_var();
  }
  return k;
}

Eigen::VectorXd kernel_diag(int n, const RbfHyperparams& hp) {
  if (n < 0) throw InputError("kernel_diag: negative size");
  return Eigen::VectorXd::Constant(n, hp.signal_var());
}

KernelHyperGrads kernel_hyper_grads(const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& gram_adjoint,
                                    const RbfHyperparams& hp) {
  const Eigen::Index n = x.rows();
  if (gram_adjoint.rows() != n || gram_adjoint.cols() != n) {
    throw InputError("kernel_hyper_grads: adjoint shape mismatch");
  }
  const double l = hp.length_scale();
  const double inv_l2 = 1.0 / (l * l);

  // Noise-free part of the Gram matrix and the pairwise squared distances.
  Eigen::MatrixXd ktilde = kernel_matrix(x, x, hp, /*add_noise=*/false);
  const Eigen::VectorXd x2 = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (x * x.transpose());
  d2.colwise() += x2;
  d2.rowwise() += x2.transpose();
  d2 = d2.cwiseMax(0.0);

  KernelHyperGrads g;
  // dK/d log l = Ktilde .* d2 / l^2 (noise diagonal does not depend on l).
  g.d_log_length_scale =
      (gram_adjoint.array() * ktilde.array() * d2.array()).sum() * inv_l2;
  // dK/d log sf2 = Ktilde.
  g.d_log_signal_var = (gram_adjoint.array() * ktilde.array()).sum();
  // dK/d log sn2 = sn2 * I.
  g.d_log_noise_var = hp.noise_var() * gram_adjoint.diagonal().sum();
  return g;
}

Eigen::MatrixXd kernel_input_grads(const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& gram_adjoint,
                                   const RbfHyperparams& hp) {
  const Eigen::Index n = x.rows();
  if (gram_adjoint.rows() != n || gram_adjoint.cols() != n) {
    throw InputError("kernel_input_grads: adjoint shape mismatch");
  }
  const double l = hp.length_scale();
  const double inv_l2 = 1.0 / (l * l);

  const Eigen::MatrixXd ktilde = kernel_matrix(x, x, hp, /*add_noise=*/false);
  // W_ij = (G_ij + G_ji) * Ktilde_ij / l^2, then
  // dL/dx_i = sum_j W_ij * (x_j - x_i) = (W x)_i - rowsum(W)_i * x_i.
  const Eigen::MatrixXd w =
      ((gram_adjoint + gram_adjoint.transpose()).array() * ktilde.array() *
       inv_l2)
          .matrix();
  const Eigen::VectorXd row_sums = w.rowwise().sum();
  Eigen::MatrixXd grads = w * x;
  grads -= row_sums.asDiagonal() * x;
  return grads;
}

FeatureBatch encode_windows(const std::vector<Eigen::MatrixXd>& windows,
                            FeatureKind kind, const LstmParams& params) {
  FeatureBatch out;
  if (windows.empty()) {
    out.features.resize(0, 0);
    return out;
  }
  const Eigen::Index steps = windows.front().rows();
  const Eigen::Index in_dim = windows.front().cols();
  for (const auto& w : windows) {
    if (w.rows() != steps || w.cols() != in_dim) {
      throw InputError("encode_windows: ragged window batch");
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(windows.size());
  if (kind == FeatureKind::flat) {
    out.features.resize(n, steps * in_dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      // Row-major flatten: all features of step 0, then step 1, ...
      for (Eigen::Index t = 0; t < steps; ++t)
        for (Eigen::Index d = 0; d < in_dim; ++d)
          out.features(i, t * in_dim + d) = windows[i](t, d);
    }
    return out;
  }

  if (in_dim != params.input_dim) {
    throw InputError("encode_windows: window width != encoder input_dim");
  }
  out.features.resize(n, params.hidden_dim);
  out.tapes.reserve(n);
  std::vector<Eigen::VectorXd> seq(steps);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < steps; ++t) seq[t] = windows[i].row(t);
    LstmForward fwd = lstm_forward(seq, params);
    out.features.row(i) = fwd.final_hidden.transpose();
    out.tapes.push_back(std::move(fwd.tape));
  }
  return out;
}

LstmParams encoder_backprop(const FeatureBatch& batch,
                            const Eigen::MatrixXd& feature_grads,
                            FeatureKind kind, const LstmParams& params) {
  LstmParams total = LstmParams::zeros(params.input_dim, params.hidden_dim);
  if (kind == FeatureKind::flat) return total;

  const Eigen::Index n = batch.features.rows();
  if (feature_grads.rows() != n ||
      feature_grads.cols() != params.hidden_dim ||
      static_cast<Eigen::Index>(batch.tapes.size()) != n) {
    throw InputError("encoder_backprop: gradient shape mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd g = feature_grads.row(i).transpose();
    LstmBackward bwd = lstm_bptt(batch.tapes[i], g, params);
    total.add_scaled(bwd.grad_params, 1.0);
  }
  return total;
}

}  // namespace dkgp
