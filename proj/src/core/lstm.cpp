#include "core/lstm.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace dkgp {

namespace {

enum GateIndex { kInput = 0, kForget = 1, kCandidate = 2, kOutput = 3 };

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) {
  return 1.0 / (1.0 + (-z).exp());
}

}  // namespace

LstmParams LstmParams::zeros(int input_dim, int hidden_dim) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  for (int g = 0; g < 4; ++g) {
    p.w[g] = Eigen::MatrixXd::Zero(hidden_dim, input_dim);
    p.u[g] = Eigen::MatrixXd::Zero(hidden_dim, hidden_dim);
    p.b[g] = Eigen::VectorXd::Zero(hidden_dim);
  }
  return p;
}

LstmParams LstmParams::seeded(int input_dim, int hidden_dim,
                              std::uint64_t seed) {
  LstmParams p = zeros(input_dim, hidden_dim);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (int g = 0; g < 4; ++g) {
    for (Eigen::Index i = 0; i < p.w[g].size(); ++i)
      p.w[g].data()[i] = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < p.u[g].size(); ++i)
      p.u[g].data()[i] = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < p.b[g].size(); ++i)
      p.b[g].data()[i] = rng.uniform(-bound, bound);
  }
  p.b[kForget].array() += 1.0;
  return p;
}

void LstmParams::set_zero() {
  for (int g = 0; g < 4; ++g) {
    w[g].setZero();
    u[g].setZero();
    b[g].setZero();
  }
}

bool LstmParams::same_shape(const LstmParams& o) const {
  return input_dim == o.input_dim && hidden_dim == o.hidden_dim;
}

bool LstmParams::all_finite() const {
  for (int g = 0; g < 4; ++g) {
    if (!w[g].allFinite() || !u[g].allFinite() || !b[g].allFinite())
      return false;
  }
  return true;
}

void LstmParams::add_scaled(const LstmParams& g, double scale) {
  for (int k = 0; k < 4; ++k) {
    w[k] += scale * g.w[k];
    u[k] += scale * g.u[k];
    b[k] += scale * g.b[k];
  }
}

void LstmParams::scale_in_place(double s) {
  for (int k = 0; k < 4; ++k) {
    w[k] *= s;
    u[k] *= s;
    b[k] *= s;
  }
}

double LstmParams::squared_norm() const {
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    acc += w[k].squaredNorm() + u[k].squaredNorm() + b[k].squaredNorm();
  }
  return acc;
}

LstmForward lstm_forward(const std::vector<Eigen::VectorXd>& sequence,
                         const LstmParams& params) {
  if (sequence.empty()) throw InputError("lstm_forward: empty sequence");
  const int h = params.hidden_dim;
  const int steps = static_cast<int>(sequence.size());

  LstmForward out;
  out.tape.steps = steps;
  out.tape.x.reserve(steps);
  for (int g = 0; g < 4; ++g) out.tape.gate[g].reserve(steps);
  out.tape.cell.reserve(steps);
  out.tape.hidden.reserve(steps);

  Eigen::VectorXd hidden = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd cell = Eigen::VectorXd::Zero(h);

  for (int t = 0; t < steps; ++t) {
    const Eigen::VectorXd& x = sequence[t];
    if (x.size() != params.input_dim) {
      throw InputError("lstm_forward: input dimension mismatch");
    }
    if (!x.allFinite()) throw InputError("lstm_forward: non-finite input");

    Eigen::VectorXd pre[4];
    for (int g = 0; g < 4; ++g)
      pre[g] = params.w[g] * x + params.u[g] * hidden + params.b[g];

    const Eigen::VectorXd gi = sigmoid(pre[kInput].array());
    const Eigen::VectorXd gf = sigmoid(pre[kForget].array());
    const Eigen::VectorXd gg = pre[kCandidate].array().tanh();
    const Eigen::VectorXd go = sigmoid(pre[kOutput].array());

    cell = gf.cwiseProduct(cell) + gi.cwiseProduct(gg);
    hidden = go.cwiseProduct(cell.array().tanh().matrix());

    out.tape.x.push_back(x);
    out.tape.gate[kInput].push_back(gi);
    out.tape.gate[kForget].push_back(gf);
    out.tape.gate[kCandidate].push_back(gg);
    out.tape.gate[kOutput].push_back(go);
    out.tape.cell.push_back(cell);
    out.tape.hidden.push_back(hidden);
  }

  out.final_hidden = hidden;
  return out;
}

LstmBackward lstm_bptt(const LstmTape& tape, const Eigen::VectorXd& grad_output,
                       const LstmParams& params) {
  const int h = params.hidden_dim;
  if (tape.steps < 1 || tape.x.empty() ||
      tape.hidden.front().size() != h ||
      tape.x.front().size() != params.input_dim) {
    throw InputError("lstm_bptt: tape does not match params");
  }
  if (grad_output.size() != h) {
    throw InputError("lstm_bptt: grad_output length mismatch");
  }

  LstmBackward out;
  out.grad_params = LstmParams::zeros(params.input_dim, params.hidden_dim);
  out.grad_inputs.assign(tape.steps, Eigen::VectorXd::Zero(params.input_dim));

  Eigen::VectorXd d_hidden = grad_output;
  Eigen::VectorXd d_cell = Eigen::VectorXd::Zero(h);

  for (int t = tape.steps - 1; t >= 0; --t) {
    const Eigen::VectorXd& gi = tape.gate[kInput][t];
    const Eigen::VectorXd& gf = tape.gate[kForget][t];
    const Eigen::VectorXd& gg = tape.gate[kCandidate][t];
    const Eigen::VectorXd& go = tape.gate[kOutput][t];
    const Eigen::VectorXd& c = tape.cell[t];
    const Eigen::VectorXd c_prev =
        t > 0 ? tape.cell[t - 1] : Eigen::VectorXd::Zero(h);
    const Eigen::VectorXd h_prev =
        t > 0 ? tape.hidden[t - 1] : Eigen::VectorXd::Zero(h);

    const Eigen::ArrayXd tanh_c = c.array().tanh();
    d_cell.array() += d_hidden.array() * go.array() * (1.0 - tanh_c.square());
    const Eigen::ArrayXd d_go = d_hidden.array() * tanh_c;

    Eigen::VectorXd d_pre[4];
    d_pre[kOutput] = (d_go * go.array() * (1.0 - go.array())).matrix();
    d_pre[kInput] =
        (d_cell.array() * gg.array() * gi.array() * (1.0 - gi.array())).matrix();
    d_pre[kCandidate] =
        (d_cell.array() * gi.array() * (1.0 - gg.array().square())).matrix();
    d_pre[kForget] = (d_cell.array() * c_prev.array() * gf.array() *
                      (1.0 - gf.array()))
                         .matrix();

    Eigen::VectorXd d_x = Eigen::VectorXd::Zero(params.input_dim);
    Eigen::VectorXd d_h_prev = Eigen::VectorXd::Zero(h);
    for (int g = 0; g < 4; ++g) {
      out.grad_params.w[g].noalias() += d_pre[g] * tape.x[t].transpose();
      out.grad_params.u[g].noalias() += d_pre[g] * h_prev.transpose();
      out.grad_params.b[g] += d_pre[g];
      d_x.noalias() += params.w[g].transpose() * d_pre[g];
      d_h_prev.noalias() += params.u[g].transpose() * d_pre[g];
    }
    out.grad_inputs[t] = d_x;

    d_hidden = d_h_prev;
    d_cell = d_cell.cwiseProduct(gf);
  }
  return out;
}

}  // namespace dkgp
