#include "core/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace dkgp {

namespace {

using Json = nlohmann::ordered_json;

void require_keys(const Json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (allowed.find(key) == allowed.end()) {
      throw ParseError("config: unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("config: bad value for '") + key + "': " +
                       e.what());
    }
  }
}

}  // namespace

const std::vector<std::string>& known_model_ids() {
  static const std::vector<std::string> ids{
      "gp_lstm",          "sgarch-norm",    "sgarch-std",   "sgarch-sstd",
      "egarch-norm",      "egarch-std",     "egarch-sstd",  "gjr-garch-norm",
      "gjr-garch-std",    "gjr-garch-sstd",
  };
  return ids;
}

bool model_is_gp(const std::string& id) { return id == "gp_lstm"; }

GarchSpec garch_spec_for_model(const std::string& id) {
  const size_t dash = id.rfind('-');
  if (dash == std::string::npos) {
    throw InputError("model '" + id + "' is not a benchmark id");
  }
  const std::string family = id.substr(0, dash);
  const std::string dist = id.substr(dash + 1);

  GarchSpec spec;
  if (family == "sgarch") {
    spec.family = GarchFamily::sgarch;
  } else if (family == "egarch") {
    spec.family = GarchFamily::egarch;
  } else if (family == "gjr-garch") {
    spec.family = GarchFamily::gjr;
  } else {
    throw InputError("model '" + id + "' is not a benchmark id");
  }
  spec.dist = innovation_dist_from_name(dist);
  return spec;
}

RunConfig parse_config_json(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("config: top level must be an object");

  require_keys(root,
               {"data", "models", "grid", "train", "ks", "alphas", "test_len",
                "risk_free", "window_len", "normalizer", "zeros_correct",
                "refit_each_day", "threads", "out_dir", "seed"},
               "top level");

  RunConfig cfg;

  if (root.contains("data")) {
    const Json& data = root.at("data");
    require_keys(data, {"csv", "synthetic"}, "data");
    if (data.contains("csv") && data.contains("synthetic")) {
      throw ParseError("config: data must name either csv or synthetic");
    }
    if (data.contains("csv")) {
      cfg.csv_path = data.at("csv").get<std::string>();
    } else if (data.contains("synthetic")) {
      cfg.use_synthetic = true;
      const Json& syn = data.at("synthetic");
      require_keys(syn,
                   {"kind", "n_stocks", "n_days", "mu", "k0", "alpha1", "rho1",
                    "persist", "phi", "tau", "sigma0", "start_date"},
                   "data.synthetic");
      std::string kind = synthetic_kind_name(cfg.synthetic.kind);
      read_field(syn, "kind", kind);
      cfg.synthetic.kind = synthetic_kind_from_name(kind);
      read_field(syn, "n_stocks", cfg.synthetic_stocks);
      read_field(syn, "n_days", cfg.synthetic_days);
      read_field(syn, "mu", cfg.synthetic.mu);
      read_field(syn, "k0", cfg.synthetic.k0);
      read_field(syn, "alpha1", cfg.synthetic.alpha1);
      read_field(syn, "rho1", cfg.synthetic.rho1);
      read_field(syn, "persist", cfg.synthetic.persist);
      read_field(syn, "phi", cfg.synthetic.phi);
      read_field(syn, "tau", cfg.synthetic.tau);
      read_field(syn, "sigma0", cfg.synthetic.sigma0);
      read_field(syn, "start_date", cfg.synthetic.start_date);
    }
  }

  read_field(root, "models", cfg.models);

  if (root.contains("grid")) {
    const Json& grid = root.at("grid");
    require_keys(grid, {"length_scales", "signal_vars", "noise_vars"}, "grid");
    read_field(grid, "length_scales", cfg.grid.length_scales);
    read_field(grid, "signal_vars", cfg.grid.signal_vars);
    read_field(grid, "noise_vars", cfg.grid.noise_vars);
  }

  if (root.contains("train")) {
    const Json& train = root.at("train");
    require_keys(train,
                 {"lstm_learning_rate", "hp_learning_rate", "momentum",
                  "max_epochs", "patience", "grid_epochs", "hidden_dim"},
                 "train");
    read_field(train, "lstm_learning_rate", cfg.train.lstm_learning_rate);
    read_field(train, "hp_learning_rate", cfg.train.hp_learning_rate);
    read_field(train, "momentum", cfg.train.momentum);
    read_field(train, "max_epochs", cfg.train.max_epochs);
    read_field(train, "patience", cfg.train.patience);
    read_field(train, "grid_epochs", cfg.train.grid_epochs);
    read_field(train, "hidden_dim", cfg.train.hidden_dim);
  }

  read_field(root, "ks", cfg.ks);
  read_field(root, "alphas", cfg.alphas);
  read_field(root, "test_len", cfg.test_len);
  read_field(root, "risk_free", cfg.risk_free);
  read_field(root, "window_len", cfg.window_len);
  if (root.contains("normalizer")) {
    cfg.normalizer =
        norm_kind_from_name(root.at("normalizer").get<std::string>());
  }
  read_field(root, "zeros_correct", cfg.zeros_correct_accuracy);
  read_field(root, "refit_each_day", cfg.refit_each_day);
  read_field(root, "threads", cfg.threads);
  read_field(root, "out_dir", cfg.out_dir);
  read_field(root, "seed", cfg.seed);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

void validate_config(const RunConfig& cfg) {
  if (cfg.models.empty()) throw InputError("config: empty model list");
  const auto& known = known_model_ids();
  std::set<std::string> seen;
  for (const auto& id : cfg.models) {
    if (std::find(known.begin(), known.end(), id) == known.end()) {
      throw InputError("config: unknown model id '" + id + "'");
    }
    if (!seen.insert(id).second) {
      throw InputError("config: duplicate model id '" + id + "'");
    }
  }
  if (cfg.ks.empty()) throw InputError("config: empty k list");
  for (int k : cfg.ks) {
    if (k < 1) throw InputError("config: portfolio k must be >= 1");
  }
  if (cfg.alphas.empty()) throw InputError("config: empty alpha list");
  for (double a : cfg.alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw InputError("config: alphas must lie in (0,1)");
    }
  }
  if (cfg.test_len < 1) throw InputError("config: test_len must be >= 1");
  if (cfg.window_len < 1) throw InputError("config: window_len must be >= 1");
  if (cfg.threads < 1) throw InputError("config: threads must be >= 1");
  if (!cfg.use_synthetic && cfg.csv_path.empty()) {
    throw InputError("config: no data source (csv path or synthetic spec)");
  }
  if (cfg.use_synthetic &&
      (cfg.synthetic_stocks < 1 || cfg.synthetic_days < 100)) {
    throw InputError("config: synthetic needs n_stocks >= 1, n_days >= 100");
  }
  if (cfg.grid.length_scales.empty() || cfg.grid.signal_vars.empty() ||
      cfg.grid.noise_vars.empty()) {
    throw InputError("config: grid lists must be non-empty");
  }
  for (double v : cfg.grid.length_scales) {
    if (!(v > 0.0)) throw InputError("config: grid values must be positive");
  }
  for (double v : cfg.grid.signal_vars) {
    if (!(v > 0.0)) throw InputError("config: grid values must be positive");
  }
  for (double v : cfg.grid.noise_vars) {
    if (!(v > 0.0)) throw InputError("config: grid values must be positive");
  }
  if (cfg.train.max_epochs < 1 || cfg.train.patience < 1 ||
      cfg.train.grid_epochs < 1 || cfg.train.hidden_dim < 1) {
    throw InputError("config: train budgets must be >= 1");
  }
  if (!(cfg.train.lstm_learning_rate >= 0.0) ||
      !(cfg.train.hp_learning_rate >= 0.0)) {
    throw InputError("config: learning rates must be non-negative");
  }
}

std::string canonical_config_json(const RunConfig& cfg) {
  Json root;
  Json data;
  if (cfg.use_synthetic) {
    Json syn;
    syn["kind"] = synthetic_kind_name(cfg.synthetic.kind);
    syn["n_stocks"] = cfg.synthetic_stocks;
    syn["n_days"] = cfg.synthetic_days;
    syn["mu"] = cfg.synthetic.mu;
    syn["k0"] = cfg.synthetic.k0;
    syn["alpha1"] = cfg.synthetic.alpha1;
    syn["rho1"] = cfg.synthetic.rho1;
    syn["persist"] = cfg.synthetic.persist;
    syn["phi"] = cfg.synthetic.phi;
    syn["tau"] = cfg.synthetic.tau;
    syn["sigma0"] = cfg.synthetic.sigma0;
    syn["start_date"] = cfg.synthetic.start_date;
    data["synthetic"] = syn;
  } else {
    data["csv"] = cfg.csv_path;
  }
  root["data"] = data;
  root["models"] = cfg.models;
  root["grid"] = {{"length_scales", cfg.grid.length_scales},
                  {"signal_vars", cfg.grid.signal_vars},
                  {"noise_vars", cfg.grid.noise_vars}};
  root["train"] = {{"lstm_learning_rate", cfg.train.lstm_learning_rate},
                   {"hp_learning_rate", cfg.train.hp_learning_rate},
                   {"momentum", cfg.train.momentum},
                   {"max_epochs", cfg.train.max_epochs},
                   {"patience", cfg.train.patience},
                   {"grid_epochs", cfg.train.grid_epochs},
                   {"hidden_dim", cfg.train.hidden_dim}};
  root["ks"] = cfg.ks;
  root["alphas"] = cfg.alphas;
  root["test_len"] = cfg.test_len;
  root["risk_free"] = cfg.risk_free;
  root["window_len"] = cfg.window_len;
  root["normalizer"] = norm_kind_name(cfg.normalizer);
  root["zeros_correct"] = cfg.zeros_correct_accuracy;
  root["refit_each_day"] = cfg.refit_each_day;
  root["threads"] = cfg.threads;
  root["out_dir"] = cfg.out_dir;
  root["seed"] = cfg.seed;
  return root.dump(2);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  return fnv1a(canonical_config_json(cfg));
}

}  // namespace dkgp
