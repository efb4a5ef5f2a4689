#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/data.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/synthetic.hpp"

using namespace dkgp;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.use_synthetic = true;
  cfg.synthetic.kind = SyntheticKind::regime;
  cfg.synthetic_stocks = 5;
  cfg.synthetic_days = 160;
  cfg.models = {"gp_lstm", "sgarch-norm"};
  cfg.ks = {1};
  cfg.alphas = {0.05};
  cfg.test_len = 40;
  cfg.grid.length_scales = {1.0};
  cfg.grid.signal_vars = {1.0};
  cfg.grid.noise_vars = {0.1};
  cfg.train.max_epochs = 8;
  cfg.train.grid_epochs = 2;
  cfg.train.patience = 4;
  cfg.threads = 1;
  cfg.out_dir = "out";
  cfg.seed = 42;
  return cfg;
}

const ReportBundle& tiny_bundle() {
  static const ReportBundle bundle = run_pipeline(tiny_config());
  return bundle;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_csv(const std::string& name,
                     const std::vector<ReturnSeries>& series) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << returns_csv(series);
  return path.string();
}

}  // namespace

TEST_CASE("config json round-trips through its canonical form") {
  const RunConfig cfg = tiny_config();
  const std::string canon = canonical_config_json(cfg);
  const RunConfig back = parse_config_json(canon);
  CHECK(canonical_config_json(back) == canon);
  CHECK(config_hash(back) == config_hash(cfg));

  RunConfig other = cfg;
  other.seed = 43;
  CHECK(config_hash(other) != config_hash(cfg));

  CHECK_THROWS_AS(parse_config_json("{\"bogus\": 1}"), ParseError);
  CHECK_THROWS_AS(parse_config_json("not json"), ParseError);
  CHECK_THROWS_AS(parse_config_json("[1,2]"), ParseError);
  CHECK_THROWS_AS(
      parse_config_json(
          "{\"data\": {\"csv\": \"a.csv\", \"synthetic\": {}}}"),
      ParseError);
}

TEST_CASE("validate_config enforces the run invariants") {
  RunConfig cfg = tiny_config();
  CHECK_NOTHROW(validate_config(cfg));

  RunConfig bad = cfg;
  bad.models.clear();
  CHECK_THROWS_AS(validate_config(bad), InputError);
  bad = cfg;
  bad.models = {"garch-from-the-future"};
  CHECK_THROWS_AS(validate_config(bad), InputError);
  bad = cfg;
  bad.models = {"gp_lstm", "gp_lstm"};
  CHECK_THROWS_AS(validate_config(bad), InputError);
  bad = cfg;
  bad.ks = {0};
  CHECK_THROWS_AS(validate_config(bad), InputError);
  bad = cfg;
  bad.alphas = {1.5};
  CHECK_THROWS_AS(validate_config(bad), InputError);
  bad = cfg;
  bad.use_synthetic = false;
  bad.csv_path.clear();
  CHECK_THROWS_AS(validate_config(bad), InputError);
  bad = cfg;
  bad.grid.noise_vars = {-0.1};
  CHECK_THROWS_AS(validate_config(bad), InputError);

  for (const auto& id : known_model_ids()) {
    if (id == "gp_lstm") {
      CHECK(model_is_gp(id));
      CHECK_THROWS_AS(garch_spec_for_model(id), InputError);
    } else {
      CHECK_FALSE(model_is_gp(id));
      CHECK_NOTHROW(garch_spec_for_model(id));
    }
  }
}

TEST_CASE("a small synthetic run fills every table") {
  const RunConfig cfg = tiny_config();
  const ReportBundle& b = tiny_bundle();

  CHECK(b.config_digest == config_hash(cfg));
  CHECK(b.stock_ids.size() == 5);
  CHECK(b.failed_stocks.empty());
  CHECK(b.backtest_dates.size() == 40);
  for (size_t i = 1; i < b.backtest_dates.size(); ++i) {
    CHECK(b.backtest_dates[i - 1] < b.backtest_dates[i]);
  }

  REQUIRE(b.strategy.size() == 2);  // 1 k x 2 models
  for (const auto& row : b.strategy) {
    CHECK(row.k == 1);
    CHECK(row.stats.daily_returns.size() == 40);
    CHECK(std::isfinite(row.stats.sharpe));
    CHECK(row.sub.first_half.daily_returns.size() == 20);
  }
  CHECK(b.strategy[0].model_id == "gp_lstm");
  CHECK(b.strategy[1].model_id == "sgarch-norm");

  REQUIRE(b.quality.size() == 2);
  for (const auto& q : b.quality) {
    CHECK(q.mse > 0.0);
    CHECK(q.accuracy >= 0.0);
    CHECK(q.accuracy <= 1.0);
    CHECK(q.mse_rank >= 1);
    CHECK(q.mse_occupying >= 0);
  }

  REQUIRE(b.var_tests.size() == 2);  // 1 alpha x 2 models
  for (const auto& v : b.var_tests) {
    CHECK(v.alpha == 0.05);
    CHECK(v.mean_p_value >= 0.0);
    CHECK(v.mean_p_value <= 1.0);
  }

  REQUIRE(b.diagnostics.size() == 2);
  CHECK(b.diagnostics[0].period == "first_half");
  CHECK(b.diagnostics[1].period == "second_half");
  CHECK(b.diagnostics[0].acf.size() == b.diagnostics[0].pacf.size());
  CHECK(b.diagnostics[0].acf.size() >= 1);

  REQUIRE(b.fits.size() == 10);  // 5 stocks x 2 models, stock-major
  CHECK(b.fits[0].stock_id == b.fits[1].stock_id);
  CHECK(b.fits[0].model_id == "gp_lstm");
  CHECK(b.fits[0].is_gp);
  CHECK(b.fits[1].model_id == "sgarch-norm");
  CHECK_FALSE(b.fits[1].is_gp);
  CHECK(std::isfinite(b.fits[1].log_likelihood));
  CHECK(b.wall_seconds > 0.0);
}

TEST_CASE("report json is deterministic and wall time stays out of it") {
  const RunConfig cfg = tiny_config();
  const std::string first = report_json(tiny_bundle());
  const ReportBundle again = run_pipeline(cfg);
  CHECK(report_json(again) == first);

  const auto doc = nlohmann::json::parse(first);
  for (const char* key :
       {"config", "config_digest", "stock_ids", "failed_stocks",
        "backtest_dates", "strategy", "forecast_quality", "var_tests",
        "diagnostics", "fits"}) {
    CHECK(doc.contains(key));
  }
  CHECK_FALSE(doc.contains("wall_seconds"));
  CHECK(doc["strategy"].size() == 2);
  CHECK(doc["fits"].size() == 10);
}

TEST_CASE("stocks that cannot be prepared are reported, not fatal") {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::regime;
  auto series = simulate_synthetic(spec, 3, 160, 7);
  // truncate one stock below the minimum usable length
  series[1].dates.resize(45);
  series[1].returns.conservativeResize(45);

  RunConfig cfg = tiny_config();
  cfg.use_synthetic = false;
  cfg.csv_path = temp_csv("dkgp_failed_stock.csv", series);
  cfg.models = {"sgarch-norm"};

  const ReportBundle b = run_pipeline(cfg);
  CHECK(b.stock_ids.size() == 2);
  REQUIRE(b.failed_stocks.size() == 1);
  CHECK(b.failed_stocks[0].find(series[1].stock_id + ": ") == 0);
  CHECK(b.failed_stocks[0].find("too short") != std::string::npos);
  CHECK(b.fits.size() == 2);
}

TEST_CASE("a run where every stock fails raises a numeric error") {
  SyntheticSpec spec;
  auto series = simulate_synthetic(spec, 1, 120, 8);
  series[0].dates.resize(45);
  series[0].returns.conservativeResize(45);
  RunConfig cfg = tiny_config();
  cfg.use_synthetic = false;
  cfg.csv_path = temp_csv("dkgp_all_fail.csv", series);
  cfg.models = {"sgarch-norm"};
  CHECK_THROWS_AS(run_pipeline(cfg), NumericError);
}

TEST_CASE("portfolio size is checked against the surviving universe") {
  RunConfig cfg = tiny_config();
  cfg.synthetic_stocks = 3;
  cfg.models = {"sgarch-norm"};
  cfg.ks = {2};
  try {
    run_pipeline(cfg);
    FAIL("expected an InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("portfolio k=2 needs 4 stocks") !=
          std::string::npos);
  }
}

TEST_CASE("daily refitting still produces a full bundle") {
  RunConfig cfg = tiny_config();
  cfg.synthetic_stocks = 2;
  cfg.models = {"sgarch-norm"};
  cfg.refit_each_day = true;
  const ReportBundle b = run_pipeline(cfg);
  CHECK(b.stock_ids.size() == 2);
  REQUIRE(b.strategy.size() == 1);
  CHECK(b.strategy[0].stats.daily_returns.size() == 40);
}

TEST_CASE("emit_report writes the full file set byte-stably") {
  const ReportBundle& b = tiny_bundle();
  const fs::path dir1 = fs::temp_directory_path() / "dkgp_emit_a";
  const fs::path dir2 = fs::temp_directory_path() / "dkgp_emit_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  emit_report(b, dir1.string());
  emit_report(b, dir2.string());

  const std::vector<std::string> files = {
      "strategy_summary.csv",  "strategy_detail.csv",
      "subperiod_summary.csv", "forecast_metrics.csv",
      "var_tests.csv",         "return_diagnostics.csv",
      "cumulative_gp_lstm_k1.csv", "cumulative_sgarch-norm_k1.csv",
      "report.json"};
  for (const auto& name : files) {
    CAPTURE(name);
    REQUIRE(fs::exists(dir1 / name));
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }

  const std::string summary = slurp(dir1 / "strategy_summary.csv");
  CHECK(summary.rfind("portfolio_k,model,avg_daily_return,std_dev,sharpe\n",
                      0) == 0);
  // one data row per (k, model) pair after the header
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);

  CHECK(slurp(dir1 / "report.json") == report_json(b));
}
