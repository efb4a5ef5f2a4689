#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dkgp {

// One model's next-day view of one stock, in raw log-return units.
struct Forecast {
  std::string stock_id;
  std::string date;
  double mu = 0.0;
  double sigma = 0.0;  // > 0
  std::string model_id;
};

struct DailyPortfolio {
  std::string date;
  std::vector<std::string> long_ids;
  std::vector<std::string> short_ids;
  double realized_return = 0.0;
};

struct BacktestResult {
  Eigen::VectorXd daily_returns;
  double mean = 0.0;
  double std_dev = 0.0;       // sample standard deviation
  double sharpe = 0.0;        // (mean - r_f)/std, 0 when flagged degenerate
  bool zero_std = false;
  double var5 = 0.0;          // empirical quantiles of the daily returns
  double var75 = 0.0;
  double var10 = 0.0;
  double median = 0.0;
  double long_leg_mean = 0.0;
  double short_leg_mean = 0.0;
};

// (mu - risk_free) / sigma; sigma must be positive.
double conditional_sharpe(double mu, double sigma, double risk_free = 0.0);

// Rank a day's forecasts by conditional Sharpe descending (stock_id ascending
// breaks ties); top k go long, bottom k short.
struct PortfolioSelection {
  std::vector<std::string> long_ids;
  std::vector<std::string> short_ids;
};

PortfolioSelection select_portfolio(const std::vector<Forecast>& day_forecasts,
                                    int k, double risk_free = 0.0);

// Equal-weight 2k positions; the short leg earns the negative of the shorted
// stock's realized return: (1/2k) (sum long - sum short).
double portfolio_daily_return(const std::vector<double>& long_returns,
                              const std::vector<double>& short_returns);

// Linear-interpolated empirical quantile (order statistic at index p(n-1),
// zero-based, the common "linear" convention).
double empirical_quantile(const Eigen::VectorXd& values, double p);

// Mean / sample std / Sharpe / quantile VaRs / median of a daily-return
// series; per-leg means are filled when the leg series are supplied.
BacktestResult backtest_stats(const Eigen::VectorXd& daily_returns,
                              double risk_free = 0.0,
                              const Eigen::VectorXd* long_leg = nullptr,
                              const Eigen::VectorXd* short_leg = nullptr);

// Chronological halves (odd length gives the first half the extra day, and
// sets the flag) with stats on each.
struct SubPeriodReport {
  BacktestResult first_half;
  BacktestResult second_half;
  bool odd_split = false;
};

SubPeriodReport sub_period_report(const Eigen::VectorXd& daily_returns,
                                  double risk_free = 0.0);

}  // namespace dkgp
