#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/lstm.hpp"

namespace dkgp {

// RBF hyperparameters held in log space so gradient steps cannot leave the
// positive cone. length_scale l, signal variance sf2, noise variance sn2.
struct RbfHyperparams {
  double log_length_scale = 0.0;
  double log_signal_var = 0.0;
  double log_noise_var = 0.0;

  static RbfHyperparams from_natural(double length_scale, double signal_var,
                                     double noise_var);
  double length_scale() const;
  double signal_var() const;
  double noise_var() const;
};

// k(xi, xj) = sf2 * exp(-|xi-xj|^2 / (2 l^2)), plus sn2 on the diagonal when
// `add_noise` is set (training block only; cross/test blocks are noise-free).
double rbf_eval(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj,
                const RbfHyperparams& hp, bool add_noise_if_same);

// Gram matrix between row-sets a (n x d) and b (m x d). Noise enters only
// when `add_noise` is true, which callers set for the square training block.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b,
                              const RbfHyperparams& hp, bool add_noise);

// Diagonal of the self-covariance for test points (no observation noise):
// constant sf2.
Eigen::VectorXd kernel_diag(int n, const RbfHyperparams& hp);

// Gradients of sum_ij G_ij * K_ij w.r.t. the three log-hyperparameters, on a
// square training Gram matrix (noise on the diagonal). G is the adjoint from
// the NLML.
struct KernelHyperGrads {
  double d_log_length_scale = 0.0;
  double d_log_signal_var = 0.0;
  double d_log_noise_var = 0.0;
};

KernelHyperGrads kernel_hyper_grads(const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& gram_adjoint,
                                    const RbfHyperparams& hp);

// Backprop of sum_ij G_ij * K_ij into the inputs of a square training Gram
// matrix: dL/dx_i = sum_j (G_ij + G_ji) * Ktilde_ij * (x_j - x_i) / l^2,
// where Ktilde excludes the noise diagonal. Returns an n x d matrix of
// per-row input gradients.
Eigen::MatrixXd kernel_input_grads(const Eigen::MatrixXd& x,
                                   const Eigen::MatrixXd& gram_adjoint,
                                   const RbfHyperparams& hp);

// How raw (steps x 2) windows become kernel inputs.
enum class FeatureKind {
  flat,  // row-major flatten of the window: static baseline
  lstm,  // final hidden state of the recurrent encoder: deep kernel
};

// Feature map output for a batch of windows, with the activation tapes kept
// when the encoder is recurrent so gradients can flow back through it.
struct FeatureBatch {
  Eigen::MatrixXd features;        // n x feature_dim
  std::vector<LstmTape> tapes;     // empty for FeatureKind::flat
};

// Encode each window (a steps x input_dim matrix, rows are time steps) into
// a feature row.
FeatureBatch encode_windows(const std::vector<Eigen::MatrixXd>& windows,
                            FeatureKind kind, const LstmParams& params);

// Propagate per-feature-row gradients (n x feature_dim) back through the
// encoder, accumulating into LSTM parameter space. Flat features have no
// trainable encoder, so the result is all zeros of the right shape.
LstmParams encoder_backprop(const FeatureBatch& batch,
                            const Eigen::MatrixXd& feature_grads,
                            FeatureKind kind, const LstmParams& params);

}  // namespace dkgp
