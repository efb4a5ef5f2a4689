#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "core/data.hpp"
#include "core/gp.hpp"
#include "core/kernels.hpp"
#include "core/lstm.hpp"

namespace dkgp {

// Initial RBF hyperparameter grid, iterated length_scale-major.
struct GridSpec {
  std::vector<double> length_scales{0.1, 1.0, 10.0};
  std::vector<double> signal_vars{0.1, 1.0};
  std::vector<double> noise_vars{0.01, 0.1, 1.0};
};

struct TrainConfig {
  double lstm_learning_rate = 1e-3;
  double hp_learning_rate = 1e-2;
  double momentum = 0.9;
  int max_epochs = 150;
  int patience = 10;
  int grid_epochs = 15;  // short budget used per grid combination
  int hidden_dim = 8;
  std::uint64_t rng_seed = 1;
  // Multiplying normalized residuals by this converts validation MSE to
  // denormalized (raw log-return) units: mse_raw = label_scale^2 * mse_norm.
  double label_scale = 1.0;
};

// A GP whose kernel sees windows through a feature map (recurrent encoder or
// flat window), plus the cached training-set factorization used to predict.
struct DeepGpModel {
  FeatureKind features = FeatureKind::lstm;
  LstmParams lstm;
  RbfHyperparams rbf;

  std::vector<Eigen::MatrixXd> windows;  // training windows, normalized units
  Eigen::VectorXd labels;                // normalized training labels

  // Cache, consistent with the parameters above after refresh_model.
  Eigen::MatrixXd train_features;
  CholeskyFactor chol;
  Eigen::VectorXd alpha;
};

void samples_to_arrays(const std::vector<Sample>& samples,
                       std::vector<Eigen::MatrixXd>& windows,
                       Eigen::VectorXd& labels);

DeepGpModel make_model(FeatureKind kind, const RbfHyperparams& hp,
                       const std::vector<Sample>& train, std::uint64_t seed,
                       int hidden_dim = 8);

// Re-encode the training windows and refactorize the kernel; must be called
// after any parameter change before predicting.
void refresh_model(DeepGpModel& model);

// Latent posterior over the labels of `windows`, normalized units, no
// observation noise on the variance.
GpPosterior model_predict(const DeepGpModel& model,
                          const std::vector<Eigen::MatrixXd>& windows);

// Strict-improvement early stopping; NaN never counts as an improvement.
struct EarlyStopState {
  double best_mse = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int since_improvement = 0;
};

// Feeds one epoch's validation MSE; returns true when training should stop
// (no strict improvement for `patience` consecutive epochs). `improved` out
// lets callers snapshot parameters exactly when the best epoch moves.
bool early_stop_update(EarlyStopState& state, int epoch, double val_mse,
                       int patience, bool* improved = nullptr);

struct EpochRecord {
  int epoch = 0;        // 0 = before any update
  double nlml = 0.0;    // at the parameters entering this epoch
  double val_mse = 0.0; // denormalized, after this epoch's update
};

using TrainLogger = std::function<void(const EpochRecord&)>;

struct TrainResult {
  DeepGpModel model;  // parameters from the best-validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_mse = 0.0;
};

// Joint gradient training: each epoch backpropagates the NLML through the
// kernel into the log-hyperparameters and (for recurrent features) through
// dK/dX into the LSTM weights, then takes one momentum step per group.
TrainResult train_joint(const DeepGpModel& init,
                        const std::vector<Sample>& train,
                        const std::vector<Sample>& val, const TrainConfig& cfg,
                        const TrainLogger& logger = nullptr);

struct GridEntry {
  RbfHyperparams hp;
  double val_mse = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
};

struct GridResult {
  RbfHyperparams best;
  std::vector<GridEntry> table;
};

// Short-budget joint training per combination; returns the argmin-val-MSE
// combination (the grid values, not the briefly-trained ones), first wins on
// ties. Throws NumericError("grid exhausted") when every combination fails.
GridResult grid_search(const GridSpec& grid, FeatureKind kind,
                       const std::vector<Sample>& train,
                       const std::vector<Sample>& val, const TrainConfig& cfg);

}  // namespace dkgp
