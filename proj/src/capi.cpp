#include "dkgp/dkgp.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/data.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/rng.hpp"
#include "core/synthetic.hpp"

struct dkgp_run {
  dkgp::RunConfig cfg;
  bool executed = false;
  dkgp::ReportBundle bundle;
  std::string json_cache;
  dkgp_log_fn log_fn = nullptr;
  void* log_user = nullptr;
};

namespace {

thread_local std::string g_last_error;

dkgp_status fail(dkgp_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

template <typename F>
dkgp_status guarded(F&& body) {
  try {
    return body();
  } catch (const dkgp::InputError& e) {
    return fail(DKGP_E_ARG, e.what());
  } catch (const dkgp::ParseError& e) {
    return fail(DKGP_E_PARSE, e.what());
  } catch (const dkgp::IoError& e) {
    return fail(DKGP_E_IO, e.what());
  } catch (const dkgp::NumericError& e) {
    return fail(DKGP_E_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(DKGP_E_INTERNAL, e.what());
  } catch (...) {
    return fail(DKGP_E_INTERNAL, "unknown failure");
  }
}

dkgp_status need_handle(const dkgp_run* run) {
  if (!run) return fail(DKGP_E_ARG, "null run handle");
  return DKGP_OK;
}

dkgp_status need_results(const dkgp_run* run) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  if (!run->executed) {
    return fail(DKGP_E_STATE, "results requested before dkgp_run_execute");
  }
  return DKGP_OK;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* dkgp_version(void) { return "1.0.0"; }

const char* dkgp_last_error(void) { return g_last_error.c_str(); }

dkgp_status dkgp_run_create(const char* config_json, dkgp_run** out) {
  if (!config_json || !out) return fail(DKGP_E_ARG, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto run = new dkgp_run;
    try {
      run->cfg = dkgp::parse_config_json(config_json);
    } catch (...) {
      delete run;
      throw;
    }
    *out = run;
    return DKGP_OK;
  });
}

dkgp_status dkgp_run_create_from_file(const char* path, dkgp_run** out) {
  if (!path || !out) return fail(DKGP_E_ARG, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto run = new dkgp_run;
    try {
      run->cfg = dkgp::load_config_file(path);
    } catch (...) {
      delete run;
      throw;
    }
    *out = run;
    return DKGP_OK;
  });
}

dkgp_status dkgp_run_set_logger(dkgp_run* run, dkgp_log_fn fn,
                                void* user_data) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  run->log_fn = fn;
  run->log_user = user_data;
  return DKGP_OK;
}

dkgp_status dkgp_run_set_seed(dkgp_run* run, uint64_t seed) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  run->cfg.seed = seed;
  run->executed = false;
  return DKGP_OK;
}

dkgp_status dkgp_run_set_out_dir(dkgp_run* run, const char* dir) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  if (!dir || !*dir) return fail(DKGP_E_ARG, "empty output directory");
  run->cfg.out_dir = dir;
  run->executed = false;
  return DKGP_OK;
}

dkgp_status dkgp_run_set_models(dkgp_run* run, const char* const* ids,
                                size_t n) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  if (!ids && n > 0) return fail(DKGP_E_ARG, "null model list");
  std::vector<std::string> models;
  models.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (!ids[i]) return fail(DKGP_E_ARG, "null model id");
    models.emplace_back(ids[i]);
  }
  run->cfg.models = std::move(models);
  run->executed = false;
  return DKGP_OK;
}

dkgp_status dkgp_run_set_ks(dkgp_run* run, const int* ks, size_t n) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  if (!ks && n > 0) return fail(DKGP_E_ARG, "null k list");
  run->cfg.ks.assign(ks, ks + n);
  run->executed = false;
  return DKGP_OK;
}

dkgp_status dkgp_run_use_synthetic(dkgp_run* run) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  run->cfg.use_synthetic = true;
  run->cfg.csv_path.clear();
  run->executed = false;
  return DKGP_OK;
}

dkgp_status dkgp_run_validate(const dkgp_run* run) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  return guarded([&] {
    dkgp::validate_config(run->cfg);
    return DKGP_OK;
  });
}

dkgp_status dkgp_run_execute(dkgp_run* run) {
  if (const dkgp_status s = need_handle(run); s != DKGP_OK) return s;
  return guarded([&] {
    dkgp::PipelineLogger logger;
    if (run->log_fn) {
      logger = [run](const std::string& line) {
        run->log_fn(line.c_str(), run->log_user);
      };
    }
    run->bundle = dkgp::run_pipeline(run->cfg, logger);
    run->json_cache.clear();
    run->executed = true;
    return DKGP_OK;
  });
}

dkgp_status dkgp_run_emit_report(dkgp_run* run, const char* dir) {
  if (const dkgp_status s = need_results(run); s != DKGP_OK) return s;
  return guarded([&] {
    const std::string target = dir && *dir ? dir : run->bundle.config.out_dir;
    dkgp::emit_report(run->bundle, target);
    return DKGP_OK;
  });
}

dkgp_status dkgp_run_report_json(dkgp_run* run, const char** out_json) {
  if (!out_json) return fail(DKGP_E_ARG, "null output pointer");
  if (const dkgp_status s = need_results(run); s != DKGP_OK) return s;
  return guarded([&] {
    if (run->json_cache.empty()) {
      run->json_cache = dkgp::report_json(run->bundle);
    }
    *out_json = run->json_cache.c_str();
    return DKGP_OK;
  });
}

dkgp_status dkgp_run_wall_seconds(const dkgp_run* run, double* out) {
  if (!out) return fail(DKGP_E_ARG, "null output pointer");
  if (const dkgp_status s = need_results(run); s != DKGP_OK) return s;
  *out = run->bundle.wall_seconds;
  return DKGP_OK;
}

dkgp_status dkgp_synth_csv(const char* config_json, const char* out_path) {
  if (!config_json || !out_path) return fail(DKGP_E_ARG, "null argument");
  return guarded([&] {
    const dkgp::RunConfig cfg = dkgp::parse_config_json(config_json);
    if (!cfg.use_synthetic) {
      throw dkgp::InputError(
          "synthetic generation needs a config with the synthetic source");
    }
    const auto series = dkgp::simulate_synthetic(
        cfg.synthetic, cfg.synthetic_stocks, cfg.synthetic_days,
        dkgp::derive_seed(cfg.seed, "synthetic"));
    std::FILE* f = std::fopen(out_path, "wb");
    if (!f) throw dkgp::IoError(std::string("cannot open for writing: ") +
                                out_path);
    const std::string csv = dkgp::returns_csv(series);
    const size_t written = std::fwrite(csv.data(), 1, csv.size(), f);
    const int close_rc = std::fclose(f);
    if (written != csv.size() || close_rc != 0) {
      throw dkgp::IoError(std::string("write failed: ") + out_path);
    }
    return DKGP_OK;
  });
}

dkgp_status dkgp_ingest_check(const char* csv_path, char** out_json) {
  if (!csv_path || !out_json) return fail(DKGP_E_ARG, "null argument");
  *out_json = nullptr;
  return guarded([&] {
    const auto series = dkgp::ingest_csv(csv_path);
    nlohmann::ordered_json j;
    j["stocks"] = nlohmann::ordered_json::array();
    for (const auto& s : series) {
      nlohmann::ordered_json row;
      row["stock_id"] = s.stock_id;
      row["rows"] = s.dates.size();
      row["first_date"] = s.dates.empty() ? "" : s.dates.front();
      row["last_date"] = s.dates.empty() ? "" : s.dates.back();
      j["stocks"].push_back(row);
    }
    *out_json = dup_string(j.dump(2) + "\n");
    if (!*out_json) throw std::bad_alloc();
    return DKGP_OK;
  });
}

void dkgp_string_free(char* s) { std::free(s); }

void dkgp_run_destroy(dkgp_run* run) { delete run; }

}  // extern "C"
