#include "core/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"

namespace dkgp {

MseAccuracy mse_and_accuracy(const Eigen::VectorXd& forecast_means,
                             const Eigen::VectorXd& realized,
                             bool zeros_correct) {
  const Eigen::Index n = forecast_means.size();
  if (n < 1 || realized.size() != n) {
    throw InputError("mse_and_accuracy: length mismatch or empty input");
  }
  MseAccuracy out;
  out.mse = (forecast_means - realized).squaredNorm() / static_cast<double>(n);
  int correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool hit = forecast_means[i] * realized[i] > 0.0 ||
                     (zeros_correct && forecast_means[i] == 0.0 &&
                      realized[i] == 0.0);
    if (hit) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return out;
}

Eigen::VectorXd var_forecast_series(const std::vector<Forecast>& forecasts,
                                    double alpha, InnovationDist dist,
                                    const DistParams& params) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("var_forecast_series: alpha outside (0,1)");
  }
  const double q = innovation_quantile(dist, params, alpha);
  Eigen::VectorXd out(static_cast<Eigen::Index>(forecasts.size()));
  for (size_t i = 0; i < forecasts.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] =
        forecasts[i].mu + q * forecasts[i].sigma;
  }
  return out;
}

KupiecResult kupiec_test(const Eigen::VectorXd& realized,
                         const Eigen::VectorXd& var_series, double alpha) {
  const Eigen::Index n_days = realized.size();
  if (n_days < 1 || var_series.size() != n_days) {
    throw InputError("kupiec_test: length mismatch or empty input");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InputError("kupiec_test: alpha outside (0,1)");
  }

  KupiecResult res;
  for (Eigen::Index i = 0; i < n_days; ++i) {
    if (realized[i] <= var_series[i]) ++res.n_hits;
  }

  const double big_n = static_cast<double>(n_days);
  const double n = static_cast<double>(res.n_hits);
  const double rate = n / big_n;
  auto xlogy = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); };

  const double ll_hat = xlogy(n, rate) + xlogy(big_n - n, 1.0 - rate);
  const double ll_null = xlogy(n, alpha) + xlogy(big_n - n, 1.0 - alpha);
  res.lr = 2.0 * (ll_hat - ll_null);
  if (res.lr < 0.0) res.lr = 0.0;  // guard rounding at n/N == alpha
  // chi^2 with 1 dof: P(X > lr) = erfc(sqrt(lr / 2)).
  res.p_value = std::erfc(std::sqrt(res.lr / 2.0));
  return res;
}

std::vector<int> competition_ranks(const std::vector<double>& scores,
                                   bool better_high) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return better_high ? scores[a] > scores[b] : scores[a] < scores[b];
  });
  std::vector<int> ranks(n, 0);
  for (int pos = 0; pos < n; ++pos) {
    const int idx = order[pos];
    if (pos > 0 && scores[idx] == scores[order[pos - 1]]) {
      ranks[idx] = ranks[order[pos - 1]];  // share the better rank
    } else {
      ranks[idx] = pos + 1;  // next rank skips over the tied block
    }
  }
  return ranks;
}

OccupyingResult occupying_ranking(const Eigen::MatrixXd& values,
                                  BetterDirection better) {
  const Eigen::Index n_models = values.rows();
  const Eigen::Index n_stocks = values.cols();
  if (n_models < 1 || n_stocks < 1) {
    throw InputError("occupying_ranking: empty metric matrix");
  }
  if (!values.allFinite()) {
    throw InputError("occupying_ranking: missing (non-finite) cells");
  }

  OccupyingResult res;
  res.counts.assign(n_models, 0);
  for (Eigen::Index s = 0; s < n_stocks; ++s) {
    const double extremum = better == BetterDirection::lower
                                ? values.col(s).minCoeff()
                                : values.col(s).maxCoeff();
    for (Eigen::Index m = 0; m < n_models; ++m) {
      if (values(m, s) == extremum) ++res.counts[m];
    }
  }
  std::vector<double> scores(res.counts.begin(), res.counts.end());
  res.ranks = competition_ranks(scores, /*better_high=*/true);
  return res;
}

AcfPacf acf_pacf(const Eigen::VectorXd& series, int max_lag) {
  const Eigen::Index n = series.size();
  if (max_lag < 1) throw InputError("acf_pacf: max_lag must be >= 1");
  if (n <= max_lag + 1) {
    throw InputError("acf_pacf: series too short for max_lag");
  }

  const double mean = series.mean();
  const Eigen::VectorXd centered = series.array() - mean;
  const double c0 = centered.squaredNorm() / static_cast<double>(n);
  if (!(c0 > 0.0)) throw NumericError("acf_pacf: zero-variance series");

  Eigen::VectorXd rho(max_lag + 1);
  rho[0] = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double ck = 0.0;
    for (Eigen::Index t = k; t < n; ++t) ck += centered[t] * centered[t - k];
    ck /= static_cast<double>(n);
    rho[k] = ck / c0;
  }

  // Durbin-Levinson: phi(k,k) is the partial autocorrelation at lag k.
  Eigen::VectorXd pacf(max_lag);
  Eigen::VectorXd phi_prev(max_lag + 1), phi_cur(max_lag + 1);
  phi_prev.setZero();
  phi_cur.setZero();
  double denom = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double num = rho[k];
    for (int j = 1; j < k; ++j) num -= phi_prev[j] * rho[k - j];
    const double phi_kk = denom != 0.0 ? num / denom : 0.0;
    phi_cur[k] = phi_kk;
    for (int j = 1; j < k; ++j)
      phi_cur[j] = phi_prev[j] - phi_kk * phi_prev[k - j];
    denom *= (1.0 - phi_kk * phi_kk);
    pacf[k - 1] = phi_kk;
    phi_prev = phi_cur;
  }

  AcfPacf out;
  out.acf = rho.tail(max_lag);
  out.pacf = pacf;
  return out;
}

AcfPacf averaged_diagnostics(const std::vector<Eigen::VectorXd>& series_list,
                             int max_lag) {
  if (series_list.empty()) {
    throw InputError("averaged_diagnostics: no series");
  }
  AcfPacf mean;
  mean.acf = Eigen::VectorXd::Zero(max_lag);
  mean.pacf = Eigen::VectorXd::Zero(max_lag);
  for (const auto& s : series_list) {
    const AcfPacf one = acf_pacf(s, max_lag);
    mean.acf += one.acf;
    mean.pacf += one.pacf;
  }
  const double inv = 1.0 / static_cast<double>(series_list.size());
  mean.acf *= inv;
  mean.pacf *= inv;
  return mean;
}

}  // namespace dkgp
