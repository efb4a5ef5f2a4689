// dkgp command-line front end. All functionality comes through the shared
// library's C API; this file only parses flags and formats console output.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dkgp/dkgp.h"

namespace {

using Json = nlohmann::json;

const char* status_name(dkgp_status s) {
  switch (s) {
    case DKGP_OK:
      return "ok";
    case DKGP_E_ARG:
      return "invalid-argument";
    case DKGP_E_PARSE:
      return "parse";
    case DKGP_E_IO:
      return "io";
    case DKGP_E_NUMERIC:
      return "numeric";
    case DKGP_E_STATE:
      return "state";
    default:
      return "internal";
  }
}

int fail_with(dkgp_status s) {
  std::fprintf(stderr, "error (%s): %s\n", status_name(s), dkgp_last_error());
  return static_cast<int>(s);
}

#define CHECK_OK(call)                            \
  do {                                            \
    const dkgp_status status_ = (call);           \
    if (status_ != DKGP_OK) return fail_with(status_); \
  } while (0)

struct RunHandle {
  dkgp_run* p = nullptr;
  ~RunHandle() { dkgp_run_destroy(p); }
};

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> models;
  std::vector<int> ks;
  std::uint64_t seed = 0;
  bool synthetic = false;
  bool verbose = false;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--out", o.out_dir, "output directory override");
  cmd->add_option("--models", o.models,
                  "comma-separated model ids (overrides config)")
      ->delimiter(',');
  cmd->add_option("--k", o.ks, "comma-separated portfolio sizes (override)")
      ->delimiter(',');
  o.seed_opt = cmd->add_option("--seed", o.seed, "global seed override");
  cmd->add_flag("--synthetic", o.synthetic,
                "use the built-in synthetic data source");
  cmd->add_flag("--verbose", o.verbose, "print per-epoch/per-fit progress");
}

void log_line(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int make_run(const CommonOpts& o, RunHandle& run) {
  if (o.config_path.empty()) {
    if (!o.synthetic) {
      std::fprintf(stderr, "error (invalid-argument): pass --config FILE or "
                           "--synthetic\n");
      return static_cast<int>(DKGP_E_ARG);
    }
    CHECK_OK(dkgp_run_create("{\"data\":{\"synthetic\":{}}}", &run.p));
  } else {
    CHECK_OK(dkgp_run_create_from_file(o.config_path.c_str(), &run.p));
  }
  if (o.synthetic) CHECK_OK(dkgp_run_use_synthetic(run.p));
  if (o.seed_opt && o.seed_opt->count() > 0) {
    CHECK_OK(dkgp_run_set_seed(run.p, o.seed));
  }
  if (!o.out_dir.empty()) {
    CHECK_OK(dkgp_run_set_out_dir(run.p, o.out_dir.c_str()));
  }
  if (!o.models.empty()) {
    std::vector<const char*> ids;
    ids.reserve(o.models.size());
    for (const auto& m : o.models) ids.push_back(m.c_str());
    CHECK_OK(dkgp_run_set_models(run.p, ids.data(), ids.size()));
  }
  if (!o.ks.empty()) {
    CHECK_OK(dkgp_run_set_ks(run.p, o.ks.data(), o.ks.size()));
  }
  if (o.verbose) CHECK_OK(dkgp_run_set_logger(run.p, log_line, nullptr));
  return 0;
}

int execute(const CommonOpts& o, RunHandle& run, Json& doc) {
  if (const int rc = make_run(o, run); rc != 0) return rc;
  CHECK_OK(dkgp_run_execute(run.p));
  const char* json = nullptr;
  CHECK_OK(dkgp_run_report_json(run.p, &json));
  doc = Json::parse(json);
  double wall = 0.0;
  CHECK_OK(dkgp_run_wall_seconds(run.p, &wall));
  std::fprintf(stderr, "pipeline finished in %.1f s\n", wall);
  for (const auto& failed : doc.at("failed_stocks")) {
    std::fprintf(stderr, "skipped stock: %s\n",
                 failed.get<std::string>().c_str());
  }
  return 0;
}

int cmd_ingest(const std::string& csv_path) {
  char* json = nullptr;
  CHECK_OK(dkgp_ingest_check(csv_path.c_str(), &json));
  std::fputs(json, stdout);
  dkgp_string_free(json);
  return 0;
}

int cmd_synth(const CommonOpts& o, const std::string& out_path) {
  Json cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) {
      std::fprintf(stderr, "error (io): cannot read %s\n",
                   o.config_path.c_str());
      return static_cast<int>(DKGP_E_IO);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      cfg = Json::parse(buf.str());
    } catch (const Json::exception& e) {
      std::fprintf(stderr, "error (parse): %s\n", e.what());
      return static_cast<int>(DKGP_E_PARSE);
    }
  } else {
    cfg = Json{{"data", Json{{"synthetic", Json::object()}}}};
  }
  if (o.seed_opt && o.seed_opt->count() > 0) cfg["seed"] = o.seed;
  CHECK_OK(dkgp_synth_csv(cfg.dump().c_str(), out_path.c_str()));
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int cmd_train(const CommonOpts& o) {
  RunHandle run;
  Json doc;
  if (const int rc = execute(o, run, doc); rc != 0) return rc;
  for (const auto& fit : doc.at("fits")) {
    const std::string stock = fit.at("stock_id");
    const std::string model = fit.at("model");
    if (fit.at("kind") == "gp") {
      const auto& g = fit.at("grid_choice");
      const auto& f = fit.at("final");
      std::printf(
          "%-6s %-16s grid(l=%g sf2=%g sn2=%g) -> final(l=%.4g sf2=%.4g "
          "sn2=%.4g)  best epoch %d  val mse %.6g\n",
          stock.c_str(), model.c_str(), g.at("length_scale").get<double>(),
          g.at("signal_var").get<double>(), g.at("noise_var").get<double>(),
          f.at("length_scale").get<double>(), f.at("signal_var").get<double>(),
          f.at("noise_var").get<double>(), fit.at("best_epoch").get<int>(),
          fit.at("best_val_mse").get<double>());
    } else {
      std::printf("%-6s %-16s log-likelihood %.6g  converged %s\n",
                  stock.c_str(), model.c_str(),
                  fit.at("log_likelihood").get<double>(),
                  fit.at("converged").get<bool>() ? "yes" : "no");
    }
  }
  return 0;
}

int cmd_backtest(const CommonOpts& o) {
  RunHandle run;
  Json doc;
  if (const int rc = execute(o, run, doc); rc != 0) return rc;
  std::printf("%-4s %-16s %14s %12s %10s\n", "k", "model", "avg_daily_ret",
              "std_dev", "sharpe");
  for (const auto& row : doc.at("strategy")) {
    std::printf("%-4d %-16s %14.6g %12.6g %10.5g\n",
                row.at("portfolio_k").get<int>(),
                row.at("model").get<std::string>().c_str(),
                row.at("avg_daily_return").get<double>(),
                row.at("std_dev").get<double>(),
                row.at("sharpe").get<double>());
  }
  return 0;
}

int cmd_evaluate(const CommonOpts& o) {
  RunHandle run;
  Json doc;
  if (const int rc = execute(o, run, doc); rc != 0) return rc;
  std::printf("forecast quality (mean over stocks):\n");
  std::printf("%-16s %12s %5s %4s %5s %10s %5s %4s %5s\n", "model", "mse",
              "rank", "occ", "rank", "accuracy", "rank", "occ", "rank");
  for (const auto& row : doc.at("forecast_quality")) {
    std::printf("%-16s %12.6g %5d %4d %5d %10.4f %5d %4d %5d\n",
                row.at("model").get<std::string>().c_str(),
                row.at("mse").get<double>(), row.at("mse_rank").get<int>(),
                row.at("mse_occupying").get<int>(),
                row.at("mse_occupying_rank").get<int>(),
                row.at("accuracy").get<double>(),
                row.at("accuracy_rank").get<int>(),
                row.at("accuracy_occupying").get<int>(),
                row.at("accuracy_occupying_rank").get<int>());
  }
  std::printf("\ncoverage tests (Kupiec p-value, mean over stocks):\n");
  std::printf("%-7s %-16s %12s %5s %4s %5s\n", "alpha", "model", "mean_p",
              "rank", "occ", "rank");
  for (const auto& row : doc.at("var_tests")) {
    std::printf("%-7.3g %-16s %12.6g %5d %4d %5d\n",
                row.at("alpha").get<double>(),
                row.at("model").get<std::string>().c_str(),
                row.at("mean_p_value").get<double>(),
                row.at("p_rank").get<int>(), row.at("occupying").get<int>(),
                row.at("occupying_rank").get<int>());
  }
  return 0;
}

int cmd_report(const CommonOpts& o) {
  RunHandle run;
  Json doc;
  if (const int rc = execute(o, run, doc); rc != 0) return rc;
  CHECK_OK(dkgp_run_emit_report(run.p, nullptr));
  const std::string dir = doc.at("config").at("out_dir").get<std::string>();
  std::printf("report written to %s\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep-kernel GP return forecasting and volatility "
               "benchmarking"};
  app.require_subcommand(1);

  CLI::App* ingest = app.add_subcommand("ingest", "validate an input CSV");
  std::string ingest_path;
  ingest->add_option("csv", ingest_path, "input CSV path")->required();

  CLI::App* synth =
      app.add_subcommand("synth", "generate a synthetic dataset CSV");
  CommonOpts synth_opts;
  add_common(synth, synth_opts);
  std::string synth_out;
  synth->add_option("--file", synth_out, "output CSV path")->required();

  CLI::App* train = app.add_subcommand("train", "fit models, print summaries");
  CommonOpts train_opts;
  add_common(train, train_opts);

  CLI::App* backtest =
      app.add_subcommand("backtest", "run the long-short backtests");
  CommonOpts backtest_opts;
  add_common(backtest, backtest_opts);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "forecast quality and coverage tests");
  CommonOpts evaluate_opts;
  add_common(evaluate, evaluate_opts);

  CLI::App* report =
      app.add_subcommand("report", "run everything and write report files");
  CommonOpts report_opts;
  add_common(report, report_opts);

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(ingest)) return cmd_ingest(ingest_path);
  if (app.got_subcommand(synth)) return cmd_synth(synth_opts, synth_out);
  if (app.got_subcommand(train)) return cmd_train(train_opts);
  if (app.got_subcommand(backtest)) return cmd_backtest(backtest_opts);
  if (app.got_subcommand(evaluate)) return cmd_evaluate(evaluate_opts);
  if (app.got_subcommand(report)) return cmd_report(report_opts);
  return 0;
}
