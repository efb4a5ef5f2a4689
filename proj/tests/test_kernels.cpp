#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "core/errors.hpp"
#include "core/kernels.hpp"
#include "core/rng.hpp"
#include "testutil.hpp"

using namespace dkgp;
using testutil::random_window;
using testutil::rel_err;

namespace {

Eigen::MatrixXd random_mat(Rng& rng, int n, int d) {
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

double weighted_sum(const Eigen::MatrixXd& x, const Eigen::MatrixXd& g,
                    const RbfHyperparams& hp) {
  return (g.array() * kernel_matrix(x, x, hp, true).array()).sum();
}

}  // namespace

TEST_CASE("rbf pinned evaluations") {
  const RbfHyperparams hp = RbfHyperparams::from_natural(1.0, 1.0, 0.1);
  Eigen::VectorXd a(2), b(2);
  a << 0.0, 0.0;
  b << 1.0, 1.0;  // squared distance 2 -> exp(-1)
  CHECK(rbf_eval(a, a, hp, true) == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(rbf_eval(a, a, hp, false) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rbf_eval(a, b, hp, false) ==
        doctest::Approx(0.36787944117144233).epsilon(1e-12));
  CHECK(rbf_eval(a, b, hp, false) == rbf_eval(b, a, hp, false));
}

TEST_CASE("log parameterization round-trips the natural values") {
  const RbfHyperparams hp = RbfHyperparams::from_natural(2.5, 0.7, 0.03);
  CHECK(hp.length_scale() == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(hp.signal_var() == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(hp.noise_var() == doctest::Approx(0.03).epsilon(1e-14));
}

TEST_CASE("kernel_matrix matches the entrywise oracle") {
  Rng rng(21);
  const Eigen::MatrixXd a = random_mat(rng, 6, 3);
  const Eigen::MatrixXd b = random_mat(rng, 5, 3);
  const RbfHyperparams hp = RbfHyperparams::from_natural(0.8, 1.3, 0.05);

  const Eigen::MatrixXd k = kernel_matrix(a, b, hp, false);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(std::abs(k(i, j) - rbf_eval(a.row(i), b.row(j), hp, false)) <
            1e-12);

  const Eigen::MatrixXd ks = kernel_matrix(a, a, hp, true);
  const Eigen::MatrixXd ks0 = kernel_matrix(a, a, hp, false);
  CHECK((ks - ks0 -
         hp.noise_var() * Eigen::MatrixXd::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK((ks0 - ks0.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("kernel_matrix rejects mismatched shapes") {
  Rng rng(22);
  const RbfHyperparams hp;
  CHECK_THROWS_AS(
      kernel_matrix(random_mat(rng, 3, 2), random_mat(rng, 3, 4), hp, false),
      InputError);
  CHECK_THROWS_AS(
      kernel_matrix(random_mat(rng, 3, 2), random_mat(rng, 4, 2), hp, true),
      InputError);
}

TEST_CASE("identical points make a rank-one noise-free block") {
  Eigen::MatrixXd x(2, 3);
  x << 0.4, -1.0, 2.0, 0.4, -1.0, 2.0;
  const RbfHyperparams hp = RbfHyperparams::from_natural(1.0, 1.7, 1e-8);
  const Eigen::MatrixXd k = kernel_matrix(x, x, hp, false);
  CHECK(std::abs(k(0, 1) - hp.signal_var()) < 1e-14);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  CHECK(std::abs(es.eigenvalues().minCoeff()) < 1e-10);
}

TEST_CASE("kernel_diag is the constant signal variance") {
  const RbfHyperparams hp = RbfHyperparams::from_natural(1.0, 0.6, 0.2);
  const Eigen::VectorXd d = kernel_diag(4, hp);
  CHECK(d.size() == 4);
  CHECK((d.array() - 0.6).abs().maxCoeff() < 1e-15);
}

TEST_CASE("noise hyper-gradient is the noise-weighted trace") {
  Rng rng(23);
  const Eigen::MatrixXd x = random_mat(rng, 5, 2);
  const Eigen::MatrixXd g = random_mat(rng, 5, 5);
  const RbfHyperparams hp = RbfHyperparams::from_natural(1.1, 0.9, 0.07);
  const KernelHyperGrads kg = kernel_hyper_grads(x, g, hp);
  CHECK(std::abs(kg.d_log_noise_var - hp.noise_var() * g.trace()) < 1e-12);
}

TEST_CASE("hyper-gradients match finite differences") {
  Rng rng(24);
  const Eigen::MatrixXd x = random_mat(rng, 6, 3);
  const Eigen::MatrixXd g = random_mat(rng, 6, 6);
  const RbfHyperparams hp = RbfHyperparams::from_natural(0.9, 1.4, 0.2);
  const KernelHyperGrads kg = kernel_hyper_grads(x, g, hp);

  const double h = 1e-6;
  auto fd = [&](auto setter) {
    RbfHyperparams p = hp, m = hp;
    setter(p, h);
    setter(m, -h);
    return (weighted_sum(x, g, p) - weighted_sum(x, g, m)) / (2.0 * h);
  };
  const double d_l = fd([](RbfHyperparams& q, double d) {
    q.log_length_scale += d;
  });
  const double d_sf = fd([](RbfHyperparams& q, double d) {
    q.log_signal_var += d;
  });
  const double d_sn = fd([](RbfHyperparams& q, double d) {
    q.log_noise_var += d;
  });
  CHECK(rel_err(d_l, kg.d_log_length_scale) < 1e-5);
  CHECK(rel_err(d_sf, kg.d_log_signal_var) < 1e-5);
  CHECK(rel_err(d_sn, kg.d_log_noise_var) < 1e-5);
}

TEST_CASE("input gradients match finite differences") {
  Rng rng(25);
  Eigen::MatrixXd x = random_mat(rng, 5, 3);
  const Eigen::MatrixXd g = random_mat(rng, 5, 5);
  const RbfHyperparams hp = RbfHyperparams::from_natural(1.2, 0.8, 0.05);
  const Eigen::MatrixXd grads = kernel_input_grads(x, g, hp);
  REQUIRE(grads.rows() == 5);
  REQUIRE(grads.cols() == 3);

  const double h = 1e-6;
  for (int i = 0; i < 5; ++i) {
    for (int d = 0; d < 3; ++d) {
      Eigen::MatrixXd xp = x, xm = x;
      xp(i, d) += h;
      xm(i, d) -= h;
      const double num =
          (weighted_sum(xp, g, hp) - weighted_sum(xm, g, hp)) / (2.0 * h);
      CHECK(rel_err(num, grads(i, d)) < 1e-5);
    }
  }
}

TEST_CASE("input gradients vanish when all points coincide") {
  Eigen::MatrixXd x(2, 3);
  x << 0.2, 0.5, -1.0, 0.2, 0.5, -1.0;
  Eigen::MatrixXd g(2, 2);
  g << 0.3, -1.2, 0.8, 0.5;
  const RbfHyperparams hp = RbfHyperparams::from_natural(0.7, 1.0, 0.1);
  CHECK(kernel_input_grads(x, g, hp).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero encoder collapses the kernel to signal plus noise") {
  Rng rng(26);
  std::vector<Eigen::MatrixXd> windows;
  for (int i = 0; i < 4; ++i) windows.push_back(random_window(rng, 6));
  const LstmParams zero = LstmParams::zeros(2, 8);
  const FeatureBatch batch = encode_windows(windows, FeatureKind::lstm, zero);
  REQUIRE(batch.features.rows() == 4);
  REQUIRE(batch.features.cols() == 8);
  CHECK(batch.features.cwiseAbs().maxCoeff() == 0.0);
  CHECK(batch.tapes.size() == 4);

  const RbfHyperparams hp = RbfHyperparams::from_natural(1.0, 0.9, 0.04);
  const Eigen::MatrixXd k =
      kernel_matrix(batch.features, batch.features, hp, true);
  const Eigen::MatrixXd want =
      0.9 * Eigen::MatrixXd::Ones(4, 4) +
      0.04 * Eigen::MatrixXd::Identity(4, 4);
  CHECK((k - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identical windows give signal variance off the diagonal") {
  Rng rng(27);
  const Eigen::MatrixXd w = random_window(rng, 5);
  const std::vector<Eigen::MatrixXd> windows{w, w};
  const LstmParams params = LstmParams::seeded(2, 4, 99);
  const FeatureBatch batch =
      encode_windows(windows, FeatureKind::lstm, params);
  const RbfHyperparams hp = RbfHyperparams::from_natural(0.8, 1.21, 1e-8);
  const Eigen::MatrixXd k =
      kernel_matrix(batch.features, batch.features, hp, false);
  CHECK(k(0, 1) == doctest::Approx(1.21).epsilon(1e-12));
}

TEST_CASE("flat features are the row-major window flatten") {
  Eigen::MatrixXd w(3, 2);
  w << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  const FeatureBatch batch =
      encode_windows({w}, FeatureKind::flat, LstmParams::zeros(2, 8));
  REQUIRE(batch.features.rows() == 1);
  REQUIRE(batch.features.cols() == 6);
  CHECK(batch.tapes.empty());
  for (int i = 0; i < 6; ++i)
    CHECK(batch.features(0, i) == i + 1.0);
}

TEST_CASE("ragged window batches are rejected") {
  Rng rng(28);
  const std::vector<Eigen::MatrixXd> windows{random_window(rng, 4),
                                             random_window(rng, 5)};
  CHECK_THROWS_AS(
      encode_windows(windows, FeatureKind::flat, LstmParams::zeros(2, 8)),
      InputError);
}

TEST_CASE("deep kernel matrices stay positive semidefinite") {
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(1000 + trial);
    std::vector<Eigen::MatrixXd> windows;
    for (int i = 0; i < 8; ++i) windows.push_back(random_window(rng, 10));
    const LstmParams params = LstmParams::seeded(2, 8, 7000 + trial);
    const FeatureBatch batch =
        encode_windows(windows, FeatureKind::lstm, params);
    const RbfHyperparams hp = RbfHyperparams::from_natural(
        rng.uniform(0.3, 3.0), rng.uniform(0.25, 4.0), 1e-8);
    const Eigen::MatrixXd k =
        kernel_matrix(batch.features, batch.features, hp, false);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("encoder backprop matches finite differences through the kernel") {
  Rng rng(29);
  std::vector<Eigen::MatrixXd> windows;
  for (int i = 0; i < 3; ++i) windows.push_back(random_window(rng, 4));
  const LstmParams params = LstmParams::seeded(2, 3, 17);
  const Eigen::MatrixXd g = random_mat(rng, 3, 3);
  const RbfHyperparams hp = RbfHyperparams::from_natural(0.9, 1.1, 0.02);

  auto objective = [&](const LstmParams& p) {
    const FeatureBatch b = encode_windows(windows, FeatureKind::lstm, p);
    return (g.array() *
            kernel_matrix(b.features, b.features, hp, true).array())
        .sum();
  };

  const FeatureBatch batch =
      encode_windows(windows, FeatureKind::lstm, params);
  const Eigen::MatrixXd feat_grads =
      kernel_input_grads(batch.features, g, hp);
  const LstmParams grad =
      encoder_backprop(batch, feat_grads, FeatureKind::lstm, params);

  const double h = 1e-5;
  // Spot-check one coordinate in every parameter block of every gate.
  for (int gate = 0; gate < 4; ++gate) {
    for (int block = 0; block < 3; ++block) {
      LstmParams p = params, m = params;
      double ana = 0.0;
      if (block == 0) {
        p.w[gate](1, 0) += h;
        m.w[gate](1, 0) -= h;
        ana = grad.w[gate](1, 0);
      } else if (block == 1) {
        p.u[gate](0, 2) += h;
        m.u[gate](0, 2) -= h;
        ana = grad.u[gate](0, 2);
      } else {
        p.b[gate](2) += h;
        m.b[gate](2) -= h;
        ana = grad.b[gate](2);
      }
      const double num = (objective(p) - objective(m)) / (2.0 * h);
      CHECK(rel_err(num, ana) < 1e-4);
    }
  }
}

TEST_CASE("flat encoder backprop is identically zero") {
  Rng rng(30);
  const std::vector<Eigen::MatrixXd> windows{random_window(rng, 4)};
  const LstmParams params = LstmParams::seeded(2, 3, 5);
  const FeatureBatch batch =
      encode_windows(windows, FeatureKind::flat, params);
  const Eigen::MatrixXd feat_grads = Eigen::MatrixXd::Ones(1, 8);
  const LstmParams grad =
      encoder_backprop(batch, feat_grads, FeatureKind::flat, params);
  CHECK(grad.squared_norm() == 0.0);
}
