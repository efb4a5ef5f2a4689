#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "core/distributions.hpp"
#include "core/strategy.hpp"

namespace dkgp {

struct MseAccuracy {
  double mse = 0.0;
  double accuracy = 0.0;
};

// MSE = (1/N) sum (f - r)^2; Accuracy counts days with f * r > 0. With
// `zeros_correct` a day where forecast and realized are both exactly zero
// also counts as a hit (default: strict product positivity, zeros wrong).
MseAccuracy mse_and_accuracy(const Eigen::VectorXd& forecast_means,
                             const Eigen::VectorXd& realized,
                             bool zeros_correct = false);

// Per-day VaR levels: VaR_i = mu_i + q_alpha * sigma_i, with q_alpha the
// alpha-quantile of the model's standardized innovation law.
Eigen::VectorXd var_forecast_series(const std::vector<Forecast>& forecasts,
                                    double alpha, InnovationDist dist,
                                    const DistParams& params);

struct KupiecResult {
  int n_hits = 0;
  double lr = 0.0;
  double p_value = 1.0;
};

// Unconditional-coverage likelihood ratio of the hit series
// {r_i <= VaR_i}: LR = 2 ln[(n/N)^n (1-n/N)^(N-n)] - 2 ln[(1-a)^(N-n) a^n]
// with 0 ln 0 = 0; p from the chi^2(1) tail via erfc(sqrt(LR/2)).
KupiecResult kupiec_test(const Eigen::VectorXd& realized,
                         const Eigen::VectorXd& var_series, double alpha);

// Which model wins each stock (ties award everyone at the extremum), plus
// competition ranks (1, 1, 3) over the per-model counts.
enum class BetterDirection { lower, higher };

struct OccupyingResult {
  std::vector<int> counts;  // per model, ties counted for all winners
  std::vector<int> ranks;   // competition ranking by count, descending
};

// `values(m, s)` is model m's metric on stock s; every row must be complete.
OccupyingResult occupying_ranking(const Eigen::MatrixXd& values,
                                  BetterDirection better);

// Competition ranks (1, 1, 3) over arbitrary scores; `better_high` ranks the
// largest value 1.
std::vector<int> competition_ranks(const std::vector<double>& scores,
                                   bool better_high);

struct AcfPacf {
  Eigen::VectorXd acf;   // lags 1..max_lag
  Eigen::VectorXd pacf;  // lags 1..max_lag, Durbin-Levinson on the acf
};

AcfPacf acf_pacf(const Eigen::VectorXd& series, int max_lag = 20);

// Elementwise mean of per-stock acf/pacf vectors.
AcfPacf averaged_diagnostics(const std::vector<Eigen::VectorXd>& series_list,
                             int max_lag = 20);

}  // namespace dkgp
