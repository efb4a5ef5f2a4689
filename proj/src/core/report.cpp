#include "core/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/garch.hpp"

namespace dkgp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::string strategy_summary_csv(const ReportBundle& b) {
  std::string csv = "portfolio_k,model,avg_daily_return,std_dev,sharpe\n";
  for (const auto& row : b.strategy) {
    csv += std::to_string(row.k) + "," + row.model_id + "," +
           fmt(row.stats.mean) + "," + fmt(row.stats.std_dev) + "," +
           fmt(row.stats.sharpe) + "\n";
  }
  return csv;
}

std::string strategy_detail_csv(const ReportBundle& b) {
  std::string csv =
      "portfolio_k,model,long_leg_mean,short_leg_mean,median,"
      "var_5,var_7_5,var_10,zero_std\n";
  for (const auto& row : b.strategy) {
    csv += std::to_string(row.k) + "," + row.model_id + "," +
           fmt(row.stats.long_leg_mean) + "," + fmt(row.stats.short_leg_mean) +
           "," + fmt(row.stats.median) + "," + fmt(row.stats.var5) + "," +
           fmt(row.stats.var75) + "," + fmt(row.stats.var10) + "," +
           (row.stats.zero_std ? "1" : "0") + "\n";
  }
  return csv;
}

std::string subperiod_csv(const ReportBundle& b) {
  std::string csv =
      "portfolio_k,model,period,avg_daily_return,std_dev,sharpe,odd_split\n";
  for (const auto& row : b.strategy) {
    const char* odd = row.sub.odd_split ? "1" : "0";
    csv += std::to_string(row.k) + "," + row.model_id + ",first_half," +
           fmt(row.sub.first_half.mean) + "," + fmt(row.sub.first_half.std_dev) +
           "," + fmt(row.sub.first_half.sharpe) + "," + odd + "\n";
    csv += std::to_string(row.k) + "," + row.model_id + ",second_half," +
           fmt(row.sub.second_half.mean) + "," +
           fmt(row.sub.second_half.std_dev) + "," +
           fmt(row.sub.second_half.sharpe) + "," + odd + "\n";
  }
  return csv;
}

std::string forecast_metrics_csv(const ReportBundle& b) {
  std::string csv =
      "model,mse,mse_rank,mse_occupying,mse_occupying_rank,"
      "accuracy,accuracy_rank,accuracy_occupying,accuracy_occupying_rank\n";
  for (const auto& row : b.quality) {
    csv += row.model_id + "," + fmt(row.mse) + "," +
           std::to_string(row.mse_rank) + "," +
           std::to_string(row.mse_occupying) + "," +
           std::to_string(row.mse_occupying_rank) + "," + fmt(row.accuracy) +
           "," + std::to_string(row.accuracy_rank) + "," +
           std::to_string(row.accuracy_occupying) + "," +
           std::to_string(row.accuracy_occupying_rank) + "\n";
  }
  return csv;
}

std::string var_tests_csv(const ReportBundle& b) {
  std::string csv = "alpha,model,mean_p_value,p_rank,occupying,occupying_rank\n";
  for (const auto& row : b.var_tests) {
    csv += fmt(row.alpha) + "," + row.model_id + "," + fmt(row.mean_p_value) +
           "," + std::to_string(row.p_rank) + "," +
           std::to_string(row.occupying) + "," +
           std::to_string(row.occupying_rank) + "\n";
  }
  return csv;
}

std::string diagnostics_csv(const ReportBundle& b) {
  std::string csv = "period,lag,acf,pacf\n";
  for (const auto& row : b.diagnostics) {
    for (Eigen::Index i = 0; i < row.acf.size(); ++i) {
      csv += row.period + "," + std::to_string(i + 1) + "," + fmt(row.acf[i]) +
             "," + fmt(row.pacf[i]) + "\n";
    }
  }
  return csv;
}

std::string cumulative_csv(const ReportBundle& b, const StrategyRow& row) {
  std::string csv = "date,daily_return,cumulative_return\n";
  double cumulative = 0.0;
  for (Eigen::Index d = 0; d < row.stats.daily_returns.size(); ++d) {
    cumulative += row.stats.daily_returns[d];
    csv += b.backtest_dates[static_cast<size_t>(d)] + "," +
           fmt(row.stats.daily_returns[d]) + "," + fmt(cumulative) + "\n";
  }
  return csv;
}

ordered_json stats_json(const BacktestResult& s) {
  ordered_json j;
  j["avg_daily_return"] = s.mean;
  j["std_dev"] = s.std_dev;
  j["sharpe"] = s.sharpe;
  j["zero_std"] = s.zero_std;
  return j;
}

ordered_json fit_json(const FitInfo& f) {
  ordered_json j;
  j["stock_id"] = f.stock_id;
  j["model"] = f.model_id;
  if (f.is_gp) {
    j["kind"] = "gp";
    ordered_json grid;
    grid["length_scale"] = f.grid_choice.length_scale();
    grid["signal_var"] = f.grid_choice.signal_var();
    grid["noise_var"] = f.grid_choice.noise_var();
    j["grid_choice"] = grid;
    ordered_json fin;
    fin["length_scale"] = f.final_rbf.length_scale();
    fin["signal_var"] = f.final_rbf.signal_var();
    fin["noise_var"] = f.final_rbf.noise_var();
    j["final"] = fin;
    j["best_epoch"] = f.best_epoch;
    j["best_val_mse"] = f.best_val_mse;
  } else {
    j["kind"] = "garch";
    const GarchSpec spec = garch_spec_for_model(f.model_id);
    ordered_json p;
    p["mu"] = f.garch_params.mu;
    if (spec.family == GarchFamily::egarch) {
      p["alpha0"] = f.garch_params.alpha0;
      p["alpha1"] = f.garch_params.alpha1;
      p["gamma1"] = f.garch_params.gamma1;
      p["beta1"] = f.garch_params.beta1;
    } else {
      p["k0"] = f.garch_params.k0;
      p["alpha1"] = f.garch_params.alpha1;
      p["rho1"] = f.garch_params.rho1;
      if (spec.family == GarchFamily::gjr) {
        p["gamma"] = f.garch_params.gamma;
      }
    }
    if (spec.dist != InnovationDist::normal) {
      p["nu"] = f.garch_params.dist.nu;
    }
    if (spec.dist == InnovationDist::skew_t) {
      p["skew"] = f.garch_params.dist.skew;
    }
    j["params"] = p;
    j["log_likelihood"] = f.log_likelihood;
    j["converged"] = f.converged;
  }
  return j;
}

}  // namespace

std::string report_json(const ReportBundle& b) {
  ordered_json j;
  j["config"] = ordered_json::parse(canonical_config_json(b.config));
  {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(b.config_digest));
    j["config_digest"] = buf;
  }
  j["stock_ids"] = b.stock_ids;
  j["failed_stocks"] = b.failed_stocks;
  j["backtest_dates"] = b.backtest_dates;

  ordered_json strategy = ordered_json::array();
  for (const auto& row : b.strategy) {
    ordered_json r;
    r["portfolio_k"] = row.k;
    r["model"] = row.model_id;
    r["avg_daily_return"] = row.stats.mean;
    r["std_dev"] = row.stats.std_dev;
    r["sharpe"] = row.stats.sharpe;
    r["zero_std"] = row.stats.zero_std;
    r["long_leg_mean"] = row.stats.long_leg_mean;
    r["short_leg_mean"] = row.stats.short_leg_mean;
    r["median"] = row.stats.median;
    r["var_5"] = row.stats.var5;
    r["var_7_5"] = row.stats.var75;
    r["var_10"] = row.stats.var10;
    ordered_json sub;
    sub["odd_split"] = row.sub.odd_split;
    sub["first_half"] = stats_json(row.sub.first_half);
    sub["second_half"] = stats_json(row.sub.second_half);
    r["sub_periods"] = sub;
    strategy.push_back(r);
  }
  j["strategy"] = strategy;

  ordered_json quality = ordered_json::array();
  for (const auto& row : b.quality) {
    ordered_json r;
    r["model"] = row.model_id;
    r["mse"] = row.mse;
    r["mse_rank"] = row.mse_rank;
    r["mse_occupying"] = row.mse_occupying;
    r["mse_occupying_rank"] = row.mse_occupying_rank;
    r["accuracy"] = row.accuracy;
    r["accuracy_rank"] = row.accuracy_rank;
    r["accuracy_occupying"] = row.accuracy_occupying;
    r["accuracy_occupying_rank"] = row.accuracy_occupying_rank;
    quality.push_back(r);
  }
  j["forecast_quality"] = quality;

  ordered_json var_tests = ordered_json::array();
  for (const auto& row : b.var_tests) {
    ordered_json r;
    r["alpha"] = row.alpha;
    r["model"] = row.model_id;
    r["mean_p_value"] = row.mean_p_value;
    r["p_rank"] = row.p_rank;
    r["occupying"] = row.occupying;
    r["occupying_rank"] = row.occupying_rank;
    var_tests.push_back(r);
  }
  j["var_tests"] = var_tests;

  ordered_json diagnostics = ordered_json::array();
  for (const auto& row : b.diagnostics) {
    ordered_json r;
    r["period"] = row.period;
    ordered_json acf = ordered_json::array();
    ordered_json pacf = ordered_json::array();
    for (Eigen::Index i = 0; i < row.acf.size(); ++i) {
      acf.push_back(row.acf[i]);
      pacf.push_back(row.pacf[i]);
    }
    r["acf"] = acf;
    r["pacf"] = pacf;
    diagnostics.push_back(r);
  }
  j["diagnostics"] = diagnostics;

  ordered_json fits = ordered_json::array();
  for (const auto& f : b.fits) fits.push_back(fit_json(f));
  j["fits"] = fits;

  return j.dump(2) + "\n";
}

void emit_report(const ReportBundle& bundle, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);

  const std::filesystem::path base(dir);
  write_file((base / "strategy_summary.csv").string(),
             strategy_summary_csv(bundle));
  write_file((base / "strategy_detail.csv").string(),
             strategy_detail_csv(bundle));
  write_file((base / "subperiod_summary.csv").string(),
             subperiod_csv(bundle));
  write_file((base / "forecast_metrics.csv").string(),
             forecast_metrics_csv(bundle));
  write_file((base / "var_tests.csv").string(), var_tests_csv(bundle));
  write_file((base / "return_diagnostics.csv").string(),
             diagnostics_csv(bundle));
  for (const auto& row : bundle.strategy) {
    const std::string name = "cumulative_" + row.model_id + "_k" +
                             std::to_string(row.k) + ".csv";
    write_file((base / name).string(), cumulative_csv(bundle, row));
  }
  write_file((base / "report.json").string(), report_json(bundle));
}

}  // namespace dkgp
