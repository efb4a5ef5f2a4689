#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/lstm.hpp"
#include "core/rng.hpp"
#include "testutil.hpp"

using namespace dkgp;
using testutil::rel_err;

namespace {

std::vector<Eigen::VectorXd> random_sequence(Rng& rng, int steps, int dim) {
  std::vector<Eigen::VectorXd> seq(steps);
  for (int t = 0; t < steps; ++t) {
    seq[t] = Eigen::VectorXd(dim);
    for (int d = 0; d < dim; ++d) seq[t][d] = rng.normal();
  }
  return seq;
}

}  // namespace

TEST_CASE("zero parameters give a zero hidden state") {
  Rng rng(41);
  const LstmParams zero = LstmParams::zeros(2, 8);
  const LstmForward fwd = lstm_forward(random_sequence(rng, 7, 2), zero);
  CHECK(fwd.final_hidden.size() == 8);
  CHECK(fwd.final_hidden.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one unit, one step, saturated candidate gate is half tanh half") {
  LstmParams p = LstmParams::zeros(1, 1);
  p.b[2](0) = 20.0;  // candidate gate saturates to tanh(20) ~ 1
  Eigen::VectorXd x(1);
  x << 0.7;
  const LstmForward fwd = lstm_forward({x}, p);
  // i = sigmoid(0) = 0.5, g ~ 1, c = 0.5, o = 0.5, h = 0.5 tanh(0.5).
  CHECK(std::abs(fwd.final_hidden[0] - 0.5 * std::tanh(0.5)) < 1e-6);
  CHECK(fwd.final_hidden[0] == doctest::Approx(0.23105857863).epsilon(1e-6));
}

TEST_CASE("seeded initialization is deterministic and bounded") {
  const LstmParams a = LstmParams::seeded(2, 8, 123);
  const LstmParams b = LstmParams::seeded(2, 8, 123);
  const LstmParams c = LstmParams::seeded(2, 8, 124);
  LstmParams diff = a;
  diff.add_scaled(b, -1.0);
  CHECK(diff.squared_norm() == 0.0);
  LstmParams diff2 = a;
  diff2.add_scaled(c, -1.0);
  CHECK(diff2.squared_norm() > 0.0);

  const double bound = 1.0 / std::sqrt(8.0) + 1e-12;
  for (int g = 0; g < 4; ++g) {
    CHECK(a.w[g].cwiseAbs().maxCoeff() <= bound);
    CHECK(a.u[g].cwiseAbs().maxCoeff() <= bound);
    if (g == 1) {
      CHECK(a.b[g].minCoeff() >= 1.0 - bound);  // forget bias shifted to +1
      CHECK(a.b[g].maxCoeff() <= 1.0 + bound);
    } else {
      CHECK(a.b[g].cwiseAbs().maxCoeff() <= bound);
    }
  }
}

TEST_CASE("forward pass is bitwise deterministic") {
  Rng rng(42);
  const auto seq = random_sequence(rng, 9, 2);
  const LstmParams p = LstmParams::seeded(2, 5, 7);
  const LstmForward f1 = lstm_forward(seq, p);
  const LstmForward f2 = lstm_forward(seq, p);
  CHECK((f1.final_hidden - f2.final_hidden).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hidden state stays inside the unit box") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(500 + trial);
    const auto seq = random_sequence(rng, 20, 2);
    const LstmParams p = LstmParams::seeded(2, 8, 900 + trial);
    const LstmForward fwd = lstm_forward(seq, p);
    CHECK(fwd.final_hidden.cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("zero adjoint backpropagates to zero gradients") {
  Rng rng(43);
  const auto seq = random_sequence(rng, 6, 2);
  const LstmParams p = LstmParams::seeded(2, 4, 3);
  const LstmForward fwd = lstm_forward(seq, p);
  const LstmBackward back =
      lstm_bptt(fwd.tape, Eigen::VectorXd::Zero(4), p);
  CHECK(back.grad_params.squared_norm() == 0.0);
  for (const auto& gi : back.grad_inputs)
    CHECK(gi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backprop is additive in the adjoint") {
  Rng rng(44);
  const auto seq = random_sequence(rng, 5, 2);
  const LstmParams p = LstmParams::seeded(2, 3, 8);
  const LstmForward fwd = lstm_forward(seq, p);
  Eigen::VectorXd g1(3), g2(3);
  g1 << 0.4, -1.1, 0.3;
  g2 << -0.2, 0.9, 1.5;

  const LstmBackward b1 = lstm_bptt(fwd.tape, g1, p);
  const LstmBackward b2 = lstm_bptt(fwd.tape, g2, p);
  const LstmBackward b12 = lstm_bptt(fwd.tape, g1 + g2, p);

  LstmParams sum = b1.grad_params;
  sum.add_scaled(b2.grad_params, 1.0);
  sum.add_scaled(b12.grad_params, -1.0);
  CHECK(std::sqrt(sum.squared_norm()) < 1e-10);
  for (size_t t = 0; t < seq.size(); ++t) {
    CHECK((b1.grad_inputs[t] + b2.grad_inputs[t] - b12.grad_inputs[t])
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("bptt matches finite differences on every coefficient") {
  Rng rng(45);
  const int steps = 5, in_dim = 2, hidden = 2;
  const auto seq = random_sequence(rng, steps, in_dim);
  const LstmParams p = LstmParams::seeded(in_dim, hidden, 11);
  Eigen::VectorXd gout(hidden);
  gout << 0.8, -0.6;

  auto loss_params = [&](const LstmParams& q) {
    return gout.dot(lstm_forward(seq, q).final_hidden);
  };
  const LstmForward fwd = lstm_forward(seq, p);
  const LstmBackward back = lstm_bptt(fwd.tape, gout, p);

  const double h = 1e-5;
  for (int g = 0; g < 4; ++g) {
    for (int i = 0; i < hidden; ++i) {
      for (int j = 0; j < in_dim; ++j) {
        LstmParams qp = p, qm = p;
        qp.w[g](i, j) += h;
        qm.w[g](i, j) -= h;
        CHECK(rel_err((loss_params(qp) - loss_params(qm)) / (2 * h),
                      back.grad_params.w[g](i, j)) < 1e-4);
      }
      for (int j = 0; j < hidden; ++j) {
        LstmParams qp = p, qm = p;
        qp.u[g](i, j) += h;
        qm.u[g](i, j) -= h;
        CHECK(rel_err((loss_params(qp) - loss_params(qm)) / (2 * h),
                      back.grad_params.u[g](i, j)) < 1e-4);
      }
      LstmParams qp = p, qm = p;
      qp.b[g](i) += h;
      qm.b[g](i) -= h;
      CHECK(rel_err((loss_params(qp) - loss_params(qm)) / (2 * h),
                    back.grad_params.b[g](i)) < 1e-4);
    }
  }

  for (int t = 0; t < steps; ++t) {
    for (int d = 0; d < in_dim; ++d) {
      auto seq_p = seq;
      auto seq_m = seq;
      seq_p[t][d] += h;
      seq_m[t][d] -= h;
      const double num = (gout.dot(lstm_forward(seq_p, p).final_hidden) -
                          gout.dot(lstm_forward(seq_m, p).final_hidden)) /
                         (2 * h);
      CHECK(rel_err(num, back.grad_inputs[t][d]) < 1e-4);
    }
  }
}

TEST_CASE("invalid inputs are rejected") {
  const LstmParams p = LstmParams::seeded(2, 3, 1);
  CHECK_THROWS_AS(lstm_forward({}, p), InputError);

  Eigen::VectorXd wrong(3);
  wrong << 1.0, 2.0, 3.0;
  CHECK_THROWS_AS(lstm_forward({wrong}, p), InputError);

  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(lstm_forward({bad}, p), InputError);

  Rng rng(46);
  Eigen::VectorXd x(2);
  x << 0.1, -0.2;
  const LstmForward fwd = lstm_forward({x}, p);
  const LstmParams other = LstmParams::seeded(2, 4, 1);
  CHECK_THROWS_AS(lstm_bptt(fwd.tape, Eigen::VectorXd::Zero(4), other),
                  InputError);
  CHECK_THROWS_AS(lstm_bptt(fwd.tape, Eigen::VectorXd::Zero(5), p),
                  InputError);
}
