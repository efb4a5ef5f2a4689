#include "core/pipeline.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "core/errors.hpp"
#include "core/garch.hpp"
#include "core/gp.hpp"
#include "core/rng.hpp"
#include "core/synthetic.hpp"

namespace dkgp {

namespace {

struct StockData {
  ReturnSeries series;
  NormStats stats;
  DatasetSplit split;
  std::vector<std::string> test_dates;
  Eigen::VectorXd realized_test;  // raw log returns over the test days
};

struct ModelRun {
  std::vector<Forecast> forecasts;  // one per test day
  InnovationDist dist = InnovationDist::normal;
  DistParams dist_params;
  FitInfo fit;
};

struct StockResult {
  bool failed = false;
  std::string error;
  StockData data;
  std::vector<ModelRun> runs;  // config-order models
  std::vector<std::string> log_lines;
};

StockData prepare_stock(const ReturnSeries& series, const RunConfig& cfg) {
  const Eigen::Index n = series.returns.size();
  const Eigen::Index n_samples = n - cfg.window_len;
  if (n_samples <= cfg.test_len + 10) {
    throw InputError("series too short: " + std::to_string(n) +
                     " days gives " + std::to_string(std::max<Eigen::Index>(
                         n_samples, 0)) +
                     " samples, need > test_len + 10");
  }

  // Normalization must see training rows only: everything up to and
  // including the last training label, nothing later.
  const Eigen::Index m = n_samples - cfg.test_len;
  const Eigen::Index n_train =
      static_cast<Eigen::Index>(std::floor(0.7 * static_cast<double>(m) + 1e-9));
  const Eigen::Index train_rows = cfg.window_len + n_train;

  StockData data;
  data.series = series;
  data.stats = fit_normalizer(series.returns.head(train_rows), cfg.normalizer);

  const std::vector<Sample> samples =
      build_samples(series, data.stats, cfg.window_len);
  data.split = split_dataset(samples, cfg.test_len, 0.7);

  data.test_dates.reserve(data.split.test.size());
  data.realized_test.resize(static_cast<Eigen::Index>(data.split.test.size()));
  for (size_t j = 0; j < data.split.test.size(); ++j) {
    data.test_dates.push_back(data.split.test[j].date);
    data.realized_test[static_cast<Eigen::Index>(j)] =
        series.returns[n - cfg.test_len + static_cast<Eigen::Index>(j)];
  }
  return data;
}

ModelRun run_gp(const StockData& stock, const RunConfig& cfg,
                std::uint64_t seed, std::vector<std::string>& log_lines) {
  TrainConfig tc = cfg.train;
  tc.rng_seed = seed;
  tc.label_scale = stock.stats.scale;

  const GridResult grid = grid_search(cfg.grid, FeatureKind::lstm,
                                      stock.split.train,
                                      stock.split.validation, tc);

  DeepGpModel model = make_model(FeatureKind::lstm, grid.best,
                                 stock.split.train, seed, tc.hidden_dim);
  const TrainLogger train_log = [&](const EpochRecord& rec) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "epoch %d nlml=%.6g val_mse=%.6g",
                  rec.epoch, rec.nlml, rec.val_mse);
    log_lines.push_back(std::string("[") + stock.series.stock_id +
                        "/gp_lstm] " + buf);
  };
  TrainResult trained =
      train_joint(model, stock.split.train, stock.split.validation, tc,
                  train_log);

  ModelRun run;
  run.dist = InnovationDist::normal;
  run.fit.stock_id = stock.series.stock_id;
  run.fit.model_id = "gp_lstm";
  run.fit.is_gp = true;
  run.fit.grid_choice = grid.best;
  run.fit.final_rbf = trained.model.rbf;
  run.fit.best_epoch = trained.best_epoch;
  run.fit.best_val_mse = trained.best_val_mse;

  const RbfHyperparams& hp = trained.model.rbf;
  const LstmParams& lstm = trained.model.lstm;
  const double sn2 = hp.noise_var();
  const int n_test = static_cast<int>(stock.split.test.size());

  if (!cfg.refit_each_day) {
    // Condition on all realized history: train + validation to start, each
    // test day appended after its forecast is emitted.
    std::vector<Eigen::MatrixXd> cond_windows;
    Eigen::VectorXd cond_labels;
    {
      std::vector<Sample> cond(stock.split.train);
      cond.insert(cond.end(), stock.split.validation.begin(),
                  stock.split.validation.end());
      samples_to_arrays(cond, cond_windows, cond_labels);
    }
    FeatureBatch base = encode_windows(cond_windows, FeatureKind::lstm, lstm);
    Eigen::MatrixXd feats = base.features;
    Eigen::MatrixXd k = kernel_matrix(feats, feats, hp, /*add_noise=*/true);
    CholeskyFactor chol = cholesky_with_jitter(k);

    Eigen::VectorXd labels = cond_labels;
    for (int j = 0; j < n_test; ++j) {
      const Sample& day = stock.split.test[j];
      const FeatureBatch fb =
          encode_windows({day.window}, FeatureKind::lstm, lstm);
      const Eigen::MatrixXd k_cross =
          kernel_matrix(fb.features, feats, hp, /*add_noise=*/false);
      const Eigen::VectorXd alpha = chol.solve(labels);
      const double mean_norm = (k_cross * alpha)(0);
      const Eigen::VectorXd v =
          chol.lower.triangularView<Eigen::Lower>().solve(
              k_cross.transpose().col(0));
      const double var_latent =
          std::max(hp.signal_var() - v.squaredNorm(), 0.0);

      Forecast f;
      f.stock_id = stock.series.stock_id;
      f.date = day.date;
      f.model_id = "gp_lstm";
      f.mu = stock.stats.invert(mean_norm);
      f.sigma = std::sqrt(var_latent + sn2) * stock.stats.scale;
      run.forecasts.push_back(f);

      // Only now may day j's label enter the conditioning set.
      assert(static_cast<int>(run.forecasts.size()) == j + 1);
      cholesky_append(chol, k_cross.transpose().col(0),
                      hp.signal_var() + sn2);
      const Eigen::Index sz = feats.rows();
      feats.conservativeResize(sz + 1, feats.cols());
      feats.row(sz) = fb.features.row(0);
      labels.conservativeResize(sz + 1);
      labels[sz] = day.label;
    }
  } else {
    // Experimental: re-optimize every day on all realized samples, with the
    // original validation set held out and a short per-day budget.
    TrainConfig daily = tc;
    daily.max_epochs = tc.grid_epochs;
    std::vector<Sample> grown(stock.split.train);
    DeepGpModel current = trained.model;
    for (int j = 0; j < n_test; ++j) {
      const TrainResult r =
          train_joint(current, grown, stock.split.validation, daily);
      current = r.model;
      const GpPosterior post =
          model_predict(current, {stock.split.test[j].window});
      Forecast f;
      f.stock_id = stock.series.stock_id;
      f.date = stock.split.test[j].date;
      f.model_id = "gp_lstm";
      f.mu = stock.stats.invert(post.mean(0));
      f.sigma = std::sqrt(post.variance(0) + current.rbf.noise_var()) *
                stock.stats.scale;
      run.forecasts.push_back(f);
      grown.push_back(stock.split.test[j]);
    }
    run.fit.final_rbf = current.rbf;
  }
  return run;
}

ModelRun run_garch(const StockData& stock, const std::string& model_id,
                   const RunConfig& cfg, std::uint64_t seed,
                   std::vector<std::string>& log_lines) {
  const GarchSpec spec = garch_spec_for_model(model_id);
  const Eigen::Index n = stock.series.returns.size();
  const Eigen::Index fit_len = n - cfg.test_len;
  const Eigen::VectorXd fit_span = stock.series.returns.head(fit_len);

  const GarchFit fit = fit_mle(spec, fit_span, seed);
  {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "ll=%.6g converged=%d",
                  fit.log_likelihood, fit.converged ? 1 : 0);
    log_lines.push_back(std::string("[") + stock.series.stock_id + "/" +
                        model_id + "] " + buf);
  }

  ModelRun run;
  run.dist = spec.dist;
  run.dist_params = fit.params.dist;
  run.fit.stock_id = stock.series.stock_id;
  run.fit.model_id = model_id;
  run.fit.is_gp = false;
  run.fit.garch_params = fit.params;
  run.fit.log_likelihood = fit.log_likelihood;
  run.fit.converged = fit.converged;

  const int n_test = static_cast<int>(cfg.test_len);
  if (!cfg.refit_each_day) {
    const Eigen::VectorXd h = variance_filter(spec, fit.params, fit_span);
    const double e_abs = spec.family == GarchFamily::egarch
                             ? innovation_abs_mean(spec.dist, fit.params.dist)
                             : 0.0;
    double h_prev = h[fit_len - 1];
    double eps_prev = fit_span[fit_len - 1] - fit.params.mu;
    for (int j = 0; j < n_test; ++j) {
      const double h_next =
          garch_step(spec, fit.params, h_prev, eps_prev, e_abs);
      if (!(h_next > 0.0) || !std::isfinite(h_next)) {
        throw NumericError("variance underflow at test day " +
                           stock.test_dates[j]);
      }
      Forecast f;
      f.stock_id = stock.series.stock_id;
      f.date = stock.test_dates[j];
      f.model_id = model_id;
      f.mu = fit.params.mu;
      f.sigma = std::sqrt(h_next);
      run.forecasts.push_back(f);

      // The realized return becomes filter state only after the forecast.
      eps_prev = stock.realized_test[j] - fit.params.mu;
      h_prev = h_next;
    }
  } else {
    for (int j = 0; j < n_test; ++j) {
      const Eigen::VectorXd history = stock.series.returns.head(fit_len + j);
      const GarchFit daily = fit_mle(spec, history, seed);
      const GarchForecast fc = forecast_one_step(daily, history);
      Forecast f;
      f.stock_id = stock.series.stock_id;
      f.date = stock.test_dates[j];
      f.model_id = model_id;
      f.mu = fc.mu;
      f.sigma = fc.sigma;
      run.forecasts.push_back(f);
    }
  }
  return run;
}

StockResult process_stock(const ReturnSeries& series, const RunConfig& cfg) {
  StockResult result;
  try {
    result.data = prepare_stock(series, cfg);
    result.runs.reserve(cfg.models.size());
    for (const std::string& model_id : cfg.models) {
      const std::uint64_t seed =
          derive_seed(cfg.seed, series.stock_id + "/" + model_id);
      try {
        if (model_is_gp(model_id)) {
          result.runs.push_back(
              run_gp(result.data, cfg, seed, result.log_lines));
        } else {
          result.runs.push_back(
              run_garch(result.data, model_id, cfg, seed, result.log_lines));
        }
      } catch (const std::exception& e) {
        throw NumericError("model " + model_id + ": " + e.what());
      }
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }
  return result;
}

// Deterministic fan-out: worker w handles stock indices w, w+T, w+2T, ...
// and writes into its own slots, so thread count never changes results.
std::vector<StockResult> process_all_stocks(
    const std::vector<ReturnSeries>& series, const RunConfig& cfg) {
  const int n = static_cast<int>(series.size());
  std::vector<StockResult> results(n);
  const int threads = std::max(1, std::min(cfg.threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) results[i] = process_stock(series[i], cfg);
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += threads) {
        results[i] = process_stock(series[i], cfg);
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace

ReportBundle run_pipeline(const RunConfig& cfg, const PipelineLogger& log) {
  const auto t_start = std::chrono::steady_clock::now();
  validate_config(cfg);

  std::vector<ReturnSeries> series;
  if (cfg.use_synthetic) {
    series = simulate_synthetic(cfg.synthetic, cfg.synthetic_stocks,
                                cfg.synthetic_days,
                                derive_seed(cfg.seed, "synthetic"));
  } else {
    series = ingest_csv(cfg.csv_path);
  }
  if (series.empty()) throw InputError("no input series");
  std::sort(series.begin(), series.end(),
            [](const ReturnSeries& a, const ReturnSeries& b) {
              return a.stock_id < b.stock_id;
            });

  const std::vector<StockResult> results = process_all_stocks(series, cfg);

  ReportBundle bundle;
  bundle.config = cfg;
  bundle.config_digest = config_hash(cfg);

  std::vector<const StockResult*> ok;
  for (const auto& r : results) {
    for (const auto& line : r.log_lines) {
      if (log) log(line);
    }
  }
  for (size_t i = 0; i < results.size(); ++i) {
    if (results[i].failed) {
      bundle.failed_stocks.push_back(series[i].stock_id + ": " +
                                     results[i].error);
      if (log) {
        log("[" + series[i].stock_id + "] FAILED: " + results[i].error);
      }
    } else {
      ok.push_back(&results[i]);
      bundle.stock_ids.push_back(series[i].stock_id);
    }
  }
  if (ok.empty()) {
    throw NumericError("every stock failed; first error: " +
                       bundle.failed_stocks.front());
  }
  const int n_stocks = static_cast<int>(ok.size());
  const int n_models = static_cast<int>(cfg.models.size());

  // Forecast quality (per model across stocks).
  {
    Eigen::MatrixXd mse(n_models, n_stocks), acc(n_models, n_stocks);
    for (int s = 0; s < n_stocks; ++s) {
      const auto& stock = *ok[s];
      for (int m = 0; m < n_models; ++m) {
        Eigen::VectorXd means(stock.data.realized_test.size());
        for (Eigen::Index j = 0; j < means.size(); ++j) {
          means[j] = stock.runs[m].forecasts[static_cast<size_t>(j)].mu;
        }
        const MseAccuracy qa =
            mse_and_accuracy(means, stock.data.realized_test,
                             cfg.zeros_correct_accuracy);
        mse(m, s) = qa.mse;
        acc(m, s) = qa.accuracy;
      }
    }
    const OccupyingResult occ_mse =
        occupying_ranking(mse, BetterDirection::lower);
    const OccupyingResult occ_acc =
        occupying_ranking(acc, BetterDirection::higher);
    std::vector<double> mse_means(n_models), acc_means(n_models);
    for (int m = 0; m < n_models; ++m) {
      mse_means[m] = mse.row(m).mean();
      acc_means[m] = acc.row(m).mean();
    }
    const std::vector<int> mse_ranks = competition_ranks(mse_means, false);
    const std::vector<int> acc_ranks = competition_ranks(acc_means, true);
    for (int m = 0; m < n_models; ++m) {
      ForecastQualityRow row;
      row.model_id = cfg.models[m];
      row.mse = mse_means[m];
      row.mse_rank = mse_ranks[m];
      row.mse_occupying = occ_mse.counts[m];
      row.mse_occupying_rank = occ_mse.ranks[m];
      row.accuracy = acc_means[m];
      row.accuracy_rank = acc_ranks[m];
      row.accuracy_occupying = occ_acc.counts[m];
      row.accuracy_occupying_rank = occ_acc.ranks[m];
      bundle.quality.push_back(row);
    }
  }

  // Coverage tests per alpha.
  for (double alpha : cfg.alphas) {
    Eigen::MatrixXd p(n_models, n_stocks);
    for (int s = 0; s < n_stocks; ++s) {
      const auto& stock = *ok[s];
      for (int m = 0; m < n_models; ++m) {
        const auto& run = stock.runs[m];
        const Eigen::VectorXd var_series = var_forecast_series(
            run.forecasts, alpha, run.dist, run.dist_params);
        p(m, s) =
            kupiec_test(stock.data.realized_test, var_series, alpha).p_value;
      }
    }
    const OccupyingResult occ = occupying_ranking(p, BetterDirection::higher);
    std::vector<double> p_means(n_models);
    for (int m = 0; m < n_models; ++m) p_means[m] = p.row(m).mean();
    const std::vector<int> p_ranks = competition_ranks(p_means, true);
    for (int m = 0; m < n_models; ++m) {
      VarTestRow row;
      row.alpha = alpha;
      row.model_id = cfg.models[m];
      row.mean_p_value = p_means[m];
      row.p_rank = p_ranks[m];
      row.occupying = occ.counts[m];
      row.occupying_rank = occ.ranks[m];
      bundle.var_tests.push_back(row);
    }
  }

  // Backtests over the dates every surviving stock actually has.
  {
    std::set<std::string> common(ok[0]->data.test_dates.begin(),
                                 ok[0]->data.test_dates.end());
    for (int s = 1; s < n_stocks; ++s) {
      std::set<std::string> mine(ok[s]->data.test_dates.begin(),
                                 ok[s]->data.test_dates.end());
      std::set<std::string> both;
      std::set_intersection(common.begin(), common.end(), mine.begin(),
                            mine.end(), std::inserter(both, both.begin()));
      common.swap(both);
    }
    bundle.backtest_dates.assign(common.begin(), common.end());
    if (bundle.backtest_dates.size() < 2) {
      throw InputError("fewer than 2 common test dates across stocks");
    }

    // date -> per-stock test index
    std::vector<std::map<std::string, int>> date_index(n_stocks);
    for (int s = 0; s < n_stocks; ++s) {
      for (size_t j = 0; j < ok[s]->data.test_dates.size(); ++j) {
        date_index[s][ok[s]->data.test_dates[j]] = static_cast<int>(j);
      }
    }

    for (int k : cfg.ks) {
      if (2 * k > n_stocks) {
        throw InputError("portfolio k=" + std::to_string(k) + " needs " +
                         std::to_string(2 * k) + " stocks, have " +
                         std::to_string(n_stocks));
      }
      for (int m = 0; m < n_models; ++m) {
        const Eigen::Index n_days =
            static_cast<Eigen::Index>(bundle.backtest_dates.size());
        Eigen::VectorXd daily(n_days), long_leg(n_days), short_leg(n_days);
        for (Eigen::Index d = 0; d < n_days; ++d) {
          const std::string& date = bundle.backtest_dates[d];
          std::vector<Forecast> day_forecasts;
          day_forecasts.reserve(n_stocks);
          for (int s = 0; s < n_stocks; ++s) {
            day_forecasts.push_back(
                ok[s]->runs[m].forecasts[date_index[s].at(date)]);
          }
          const PortfolioSelection sel =
              select_portfolio(day_forecasts, k, cfg.risk_free);

          auto realized_of = [&](const std::string& id) {
            for (int s = 0; s < n_stocks; ++s) {
              if (ok[s]->data.series.stock_id == id) {
                return ok[s]->data.realized_test[date_index[s].at(date)];
              }
            }
            throw InputError("unknown stock id '" + id + "'");
          };
          std::vector<double> long_r, short_r;
          for (const auto& id : sel.long_ids) long_r.push_back(realized_of(id));
          for (const auto& id : sel.short_ids)
            short_r.push_back(realized_of(id));
          daily[d] = portfolio_daily_return(long_r, short_r);
          long_leg[d] = Eigen::Map<const Eigen::VectorXd>(
                            long_r.data(), static_cast<Eigen::Index>(
                                               long_r.size()))
                            .mean();
          short_leg[d] = Eigen::Map<const Eigen::VectorXd>(
                             short_r.data(), static_cast<Eigen::Index>(
                                                 short_r.size()))
                             .mean();
        }
        StrategyRow row;
        row.k = k;
        row.model_id = cfg.models[m];
        row.stats = backtest_stats(daily, cfg.risk_free, &long_leg, &short_leg);
        row.sub = sub_period_report(daily, cfg.risk_free);
        bundle.strategy.push_back(std::move(row));
      }
    }
  }

  // Averaged return diagnostics per sub-period of the test window.
  {
    const Eigen::Index t_len = ok[0]->data.realized_test.size();
    const Eigen::Index first_len = (t_len + 1) / 2;
    const int max_lag =
        static_cast<int>(std::min<Eigen::Index>(20, first_len - 2));
    if (max_lag >= 1) {
      std::vector<Eigen::VectorXd> first, second;
      for (int s = 0; s < n_stocks; ++s) {
        first.push_back(ok[s]->data.realized_test.head(first_len));
        second.push_back(ok[s]->data.realized_test.tail(t_len - first_len));
      }
      DiagnosticsRow row1;
      row1.period = "first_half";
      const AcfPacf d1 = averaged_diagnostics(first, max_lag);
      row1.acf = d1.acf;
      row1.pacf = d1.pacf;
      bundle.diagnostics.push_back(std::move(row1));
      DiagnosticsRow row2;
      row2.period = "second_half";
      const AcfPacf d2 = averaged_diagnostics(second, max_lag);
      row2.acf = d2.acf;
      row2.pacf = d2.pacf;
      bundle.diagnostics.push_back(std::move(row2));
    }
  }

  for (int s = 0; s < n_stocks; ++s) {
    for (int m = 0; m < n_models; ++m) {
      bundle.fits.push_back(ok[s]->runs[m].fit);
    }
  }

  bundle.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return bundle;
}

}  // namespace dkgp
