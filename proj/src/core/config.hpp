#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/garch.hpp"
#include "core/synthetic.hpp"
#include "core/train.hpp"

namespace dkgp {

// Everything a run needs, read from a JSON config file; CLI flags override
// individual fields after parsing.
struct RunConfig {
  // Data source: a CSV path, or the synthetic generator.
  std::string csv_path;
  bool use_synthetic = false;
  SyntheticSpec synthetic;
  int synthetic_stocks = 30;
  int synthetic_days = 600;

  std::vector<std::string> models{"gp_lstm"};
  GridSpec grid;
  TrainConfig train;
  std::vector<int> ks{3, 10, 15};
  std::vector<double> alphas{0.05, 0.075, 0.10};
  int test_len = 300;
  double risk_free = 0.0;
  int window_len = 20;
  NormKind normalizer = NormKind::maxabs;
  bool zeros_correct_accuracy = false;
  bool refit_each_day = false;
  int threads = 1;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
};

// The closed set of model identifiers a config may name.
const std::vector<std::string>& known_model_ids();
bool model_is_gp(const std::string& id);

// Family/distribution for a benchmark id; throws InputError for gp_lstm or
// anything outside the closed set.
GarchSpec garch_spec_for_model(const std::string& id);

// Strict JSON parsing: unknown keys are errors. Missing keys keep defaults.
RunConfig parse_config_json(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Throws InputError when any invariant fails (model ids, ks, alphas, ...).
void validate_config(const RunConfig& cfg);

// Deterministic serialization of the effective config; the hash is FNV-1a of
// this string, echoed into report metadata.
std::string canonical_config_json(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace dkgp
