#include "core/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"

namespace dkgp {

double conditional_sharpe(double mu, double sigma, double risk_free) {
  if (!(sigma > 0.0)) {
    throw InputError("conditional_sharpe: sigma must be positive");
  }
  return (mu - risk_free) / sigma;
}

PortfolioSelection select_portfolio(const std::vector<Forecast>& day_forecasts,
                                    int k, double risk_free) {
  if (k < 1) throw InputError("select_portfolio: k must be >= 1");
  const int n = static_cast<int>(day_forecasts.size());
  if (2 * k > n) {
    throw InputError("select_portfolio: 2k exceeds the day's universe");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) {
    score[i] = conditional_sharpe(day_forecasts[i].mu, day_forecasts[i].sigma,
                                  risk_free);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return day_forecasts[a].stock_id < day_forecasts[b].stock_id;
  });

  PortfolioSelection sel;
  for (int i = 0; i < k; ++i)
    sel.long_ids.push_back(day_forecasts[order[i]].stock_id);
  for (int i = n - k; i < n; ++i)
    sel.short_ids.push_back(day_forecasts[order[i]].stock_id);
  return sel;
}

double portfolio_daily_return(const std::vector<double>& long_returns,
                              const std::vector<double>& short_returns) {
  if (long_returns.empty() || long_returns.size() != short_returns.size()) {
    throw InputError("portfolio_daily_return: legs must match and be non-empty");
  }
  const double k = static_cast<double>(long_returns.size());
  double acc = 0.0;
  for (double r : long_returns) acc += r;
  for (double r : short_returns) acc -= r;
  return acc / (2.0 * k);
}

double empirical_quantile(const Eigen::VectorXd& values, double p) {
  const Eigen::Index n = values.size();
  if (n < 1) throw InputError("empirical_quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InputError("empirical_quantile: p outside [0,1]");
  }
  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(n - 1);
  const Eigen::Index lo = static_cast<Eigen::Index>(std::floor(pos));
  const Eigen::Index hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BacktestResult backtest_stats(const Eigen::VectorXd& daily_returns,
                              double risk_free, const Eigen::VectorXd* long_leg,
                              const Eigen::VectorXd* short_leg) {
  const Eigen::Index n = daily_returns.size();
  if (n < 1) throw InputError("backtest_stats: empty return series");

  BacktestResult res;
  res.daily_returns = daily_returns;
  res.mean = daily_returns.mean();
  if (n > 1) {
    res.std_dev = std::sqrt((daily_returns.array() - res.mean).square().sum() /
                            static_cast<double>(n - 1));
  }
  if (res.std_dev > 0.0) {
    res.sharpe = (res.mean - risk_free) / res.std_dev;
  } else {
    res.sharpe = 0.0;
    res.zero_std = true;
  }
  res.var5 = empirical_quantile(daily_returns, 0.05);
  res.var75 = empirical_quantile(daily_returns, 0.075);
  res.var10 = empirical_quantile(daily_returns, 0.10);
  res.median = empirical_quantile(daily_returns, 0.5);
  if (long_leg != nullptr && long_leg->size() > 0) {
    res.long_leg_mean = long_leg->mean();
  }
  if (short_leg != nullptr && short_leg->size() > 0) {
    res.short_leg_mean = short_leg->mean();
  }
  return res;
}

SubPeriodReport sub_period_report(const Eigen::VectorXd& daily_returns,
                                  double risk_free) {
  const Eigen::Index n = daily_returns.size();
  if (n < 2) throw InputError("sub_period_report: need at least 2 days");
  const Eigen::Index first_len = (n + 1) / 2;  // odd length: extra day first

  SubPeriodReport rep;
  rep.odd_split = (n % 2) != 0;
  rep.first_half = backtest_stats(daily_returns.head(first_len), risk_free);
  rep.second_half =
      backtest_stats(daily_returns.tail(n - first_len), risk_free);
  return rep;
}

}  // namespace dkgp
