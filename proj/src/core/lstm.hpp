#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace dkgp {

// Parameters of a single-layer LSTM. Gate order throughout: input, forget,
// candidate, output. Gates use the logistic sigmoid; candidate and cell
// read-out use tanh. No peepholes, no layer norm.
struct LstmParams {
  int input_dim = 2;
  int hidden_dim = 8;
  // One block per gate: w (hidden x input), u (hidden x hidden), b (hidden).
  std::array<Eigen::MatrixXd, 4> w;
  std::array<Eigen::MatrixXd, 4> u;
  std::array<Eigen::VectorXd, 4> b;

  static LstmParams zeros(int input_dim, int hidden_dim);
  // Uniform init in [-1/sqrt(hidden), +1/sqrt(hidden)], forget bias +1.
  static LstmParams seeded(int input_dim, int hidden_dim, std::uint64_t seed);

  void set_zero();
  bool same_shape(const LstmParams& other) const;
  bool all_finite() const;

  // In-place axpy over every coefficient; used by the optimizer.
  void add_scaled(const LstmParams& g, double scale);
  void scale_in_place(double s);
  double squared_norm() const;
};

// Cached per-step activations from one forward pass, consumed by the
// backward pass.
struct LstmTape {
  int steps = 0;
  std::vector<Eigen::VectorXd> x;                  // inputs
  std::array<std::vector<Eigen::VectorXd>, 4> gate;  // i, f, g, o post-nonlinearity
  std::vector<Eigen::VectorXd> cell;
  std::vector<Eigen::VectorXd> hidden;
};

struct LstmForward {
  Eigen::VectorXd final_hidden;
  LstmTape tape;
};

// Run the recursion over `sequence` from zero initial state and return the
// final hidden state (the deep-kernel feature) plus the activation tape.
LstmForward lstm_forward(const std::vector<Eigen::VectorXd>& sequence,
                         const LstmParams& params);

struct LstmBackward {
  LstmParams grad_params;                // same shape as the forward params
  std::vector<Eigen::VectorXd> grad_inputs;
};

// Exact reverse-mode gradients of <grad_output, h_T> through the tape.
LstmBackward lstm_bptt(const LstmTape& tape, const Eigen::VectorXd& grad_output,
                       const LstmParams& params);

}  // namespace dkgp
