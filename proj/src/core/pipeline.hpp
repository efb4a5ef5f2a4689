#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/evaluation.hpp"
#include "core/strategy.hpp"
#include "core/train.hpp"

namespace dkgp {

// One (portfolio size, model) backtest over the common test dates.
struct StrategyRow {
  int k = 0;
  std::string model_id;
  BacktestResult stats;
  SubPeriodReport sub;
};

// Per-model forecast-quality summary (value = mean across stocks).
struct ForecastQualityRow {
  std::string model_id;
  double mse = 0.0;
  int mse_rank = 0;
  int mse_occupying = 0;
  int mse_occupying_rank = 0;
  double accuracy = 0.0;
  int accuracy_rank = 0;
  int accuracy_occupying = 0;
  int accuracy_occupying_rank = 0;
};

// Per (alpha, model) coverage-test summary.
struct VarTestRow {
  double alpha = 0.0;
  std::string model_id;
  double mean_p_value = 0.0;
  int p_rank = 0;
  int occupying = 0;
  int occupying_rank = 0;
};

// Averaged acf/pacf of realized test returns over one sub-period.
struct DiagnosticsRow {
  std::string period;  // "first_half" / "second_half"
  Eigen::VectorXd acf;
  Eigen::VectorXd pacf;
};

// What fitting produced for one (stock, model) pair.
struct FitInfo {
  std::string stock_id;
  std::string model_id;
  bool is_gp = false;
  // gp_lstm:
  RbfHyperparams grid_choice;
  RbfHyperparams final_rbf;
  int best_epoch = 0;
  double best_val_mse = 0.0;
  // benchmarks:
  GarchParams garch_params;
  double log_likelihood = 0.0;
  bool converged = true;
};

struct ReportBundle {
  RunConfig config;
  std::uint64_t config_digest = 0;
  std::vector<std::string> stock_ids;        // surviving stocks
  std::vector<std::string> backtest_dates;   // common test dates, ascending
  std::vector<StrategyRow> strategy;         // k-major, models in config order
  std::vector<ForecastQualityRow> quality;   // models in config order
  std::vector<VarTestRow> var_tests;         // alpha-major
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<FitInfo> fits;                 // stock-major
  std::vector<std::string> failed_stocks;    // "id: reason", excluded above
  double wall_seconds = 0.0;  // console-only; never serialized to files
};

using PipelineLogger = std::function<void(const std::string&)>;

// ingest/normalize/window/split per stock, fit every configured model,
// roll one-step forecasts across the test days, backtest per k, and build
// every evaluation table. Deterministic for a given (config, seed).
ReportBundle run_pipeline(const RunConfig& cfg,
                          const PipelineLogger& log = nullptr);

}  // namespace dkgp
