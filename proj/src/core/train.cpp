#include "core/train.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace dkgp {

namespace {

double denorm_mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth,
                  double label_scale) {
  const double mse_norm = (pred - truth).squaredNorm() /
                          static_cast<double>(pred.size());
  return label_scale * label_scale * mse_norm;
}

// Velocity state for one momentum step per parameter group.
struct Momentum {
  double v_log_l = 0.0;
  double v_log_sf = 0.0;
  double v_log_sn = 0.0;
  LstmParams v_lstm;
};

}  // namespace

void samples_to_arrays(const std::vector<Sample>& samples,
                       std::vector<Eigen::MatrixXd>& windows,
                       Eigen::VectorXd& labels) {
  windows.clear();
  windows.reserve(samples.size());
  labels.resize(static_cast<Eigen::Index>(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) {
    windows.push_back(samples[i].window);
    labels[static_cast<Eigen::Index>(i)] = samples[i].label;
  }
}

DeepGpModel make_model(FeatureKind kind, const RbfHyperparams& hp,
                       const std::vector<Sample>& train, std::uint64_t seed,
                       int hidden_dim) {
  if (train.empty()) throw InputError("make_model: empty training set");
  DeepGpModel m;
  m.features = kind;
  m.rbf = hp;
  const int input_dim = static_cast<int>(train.front().window.cols());
  m.lstm = kind == FeatureKind::lstm
               ? LstmParams::seeded(input_dim, hidden_dim, seed)
               : LstmParams::zeros(input_dim, hidden_dim);
  samples_to_arrays(train, m.windows, m.labels);
  refresh_model(m);
  return m;
}

void refresh_model(DeepGpModel& model) {
  const FeatureBatch batch =
      encode_windows(model.windows, model.features, model.lstm);
  model.train_features = batch.features;
  Eigen::MatrixXd k = kernel_matrix(model.train_features, model.train_features,
                                    model.rbf, /*add_noise=*/true);
  model.chol = cholesky_with_jitter(k);
  model.alpha = model.chol.solve(model.labels);
}

GpPosterior model_predict(const DeepGpModel& model,
                          const std::vector<Eigen::MatrixXd>& windows) {
  const FeatureBatch batch =
      encode_windows(windows, model.features, model.lstm);
  const Eigen::MatrixXd k_cross = kernel_matrix(
      batch.features, model.train_features, model.rbf, /*add_noise=*/false);
  const Eigen::VectorXd k_diag =
      kernel_diag(static_cast<int>(windows.size()), model.rbf);

  GpPosterior post;
  post.mean = k_cross * model.alpha;
  const Eigen::MatrixXd v = model.chol.lower.triangularView<Eigen::Lower>()
                                .solve(k_cross.transpose());
  post.variance =
      (k_diag.array() - v.colwise().squaredNorm().transpose().array())
          .cwiseMax(0.0);
  return post;
}

bool early_stop_update(EarlyStopState& state, int epoch, double val_mse,
                       int patience, bool* improved) {
  const bool better = std::isfinite(val_mse) && val_mse < state.best_mse;
  if (improved != nullptr) *improved = better;
  if (better) {
    state.best_mse = val_mse;
    state.best_epoch = epoch;
    state.since_improvement = 0;
  } else {
    ++state.since_improvement;
  }
  return state.since_improvement >= patience;
}

TrainResult train_joint(const DeepGpModel& init,
                        const std::vector<Sample>& train,
                        const std::vector<Sample>& val, const TrainConfig& cfg,
                        const TrainLogger& logger) {
  if (train.empty() || val.empty()) {
    throw InputError("train_joint: train and validation must be non-empty");
  }
  if (cfg.max_epochs < 1 || cfg.patience < 1) {
    throw InputError("train_joint: max_epochs and patience must be >= 1");
  }

  DeepGpModel model = init;
  samples_to_arrays(train, model.windows, model.labels);
  refresh_model(model);

  std::vector<Eigen::MatrixXd> val_windows;
  Eigen::VectorXd val_labels;
  samples_to_arrays(val, val_windows, val_labels);

  const Eigen::Index n = model.labels.size();
  const bool recurrent = model.features == FeatureKind::lstm;

  Momentum mom;
  mom.v_lstm = LstmParams::zeros(model.lstm.input_dim, model.lstm.hidden_dim);

  TrainResult result;
  EarlyStopState stop_state;

  // Snapshot of the best-validation parameters seen so far.
  LstmParams best_lstm = model.lstm;
  RbfHyperparams best_rbf = model.rbf;

  auto eval_val = [&]() {
    const GpPosterior post = model_predict(model, val_windows);
    return denorm_mse(post.mean, val_labels, cfg.label_scale);
  };
  auto record = [&](int epoch, double nlml, double mse) {
    EpochRecord rec{epoch, nlml, mse};
    result.history.push_back(rec);
    if (logger) logger(rec);
  };

  // Epoch 0: the untrained model is a candidate too.
  {
    Eigen::MatrixXd k0 = kernel_matrix(
        model.train_features, model.train_features, model.rbf, true);
    const NlmlResult init_nlml = nlml_and_grad(k0, model.labels, 0.0);
    const double mse0 = eval_val();
    record(0, init_nlml.value, mse0);
    bool improved = false;
    early_stop_update(stop_state, 0, mse0, cfg.patience, &improved);
  }

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Forward: encode, assemble the noised Gram matrix, take the NLML and its
    // matrix adjoint at the current parameters.
    const FeatureBatch batch =
        encode_windows(model.windows, model.features, model.lstm);
    model.train_features = batch.features;
    Eigen::MatrixXd k = kernel_matrix(model.train_features,
                                      model.train_features, model.rbf, true);
    NlmlResult nlml;
    try {
      nlml = nlml_and_grad(k, model.labels, 0.0);
    } catch (const NumericError& e) {
      throw NumericError("diverged at epoch " + std::to_string(epoch) + ": " +
                         e.what());
    }
    if (!std::isfinite(nlml.value)) {
      throw NumericError("diverged at epoch " + std::to_string(epoch));
    }

    // Backward through the kernel into both parameter groups.
    const KernelHyperGrads hg =
        kernel_hyper_grads(model.train_features, nlml.grad, model.rbf);
    LstmParams lstm_grad = LstmParams::zeros(model.lstm.input_dim,
                                             model.lstm.hidden_dim);
    if (recurrent) {
      const Eigen::MatrixXd feat_grads =
          kernel_input_grads(model.train_features, nlml.grad, model.rbf);
      lstm_grad = encoder_backprop(batch, feat_grads, model.features,
                                   model.lstm);
    }
    if (!lstm_grad.all_finite() || !std::isfinite(hg.d_log_length_scale) ||
        !std::isfinite(hg.d_log_signal_var) ||
        !std::isfinite(hg.d_log_noise_var)) {
      throw NumericError("diverged at epoch " + std::to_string(epoch));
    }

    // One momentum step per group: v <- mu v + g, p <- p - lr v.
    mom.v_log_l = cfg.momentum * mom.v_log_l + hg.d_log_length_scale;
    mom.v_log_sf = cfg.momentum * mom.v_log_sf + hg.d_log_signal_var;
    mom.v_log_sn = cfg.momentum * mom.v_log_sn + hg.d_log_noise_var;
    model.rbf.log_length_scale -= cfg.hp_learning_rate * mom.v_log_l;
    model.rbf.log_signal_var -= cfg.hp_learning_rate * mom.v_log_sf;
    model.rbf.log_noise_var -= cfg.hp_learning_rate * mom.v_log_sn;
    if (recurrent) {
      mom.v_lstm.scale_in_place(cfg.momentum);
      mom.v_lstm.add_scaled(lstm_grad, 1.0);
      model.lstm.add_scaled(mom.v_lstm, -cfg.lstm_learning_rate);
    }

    refresh_model(model);
    const double val_mse = eval_val();
    record(epoch, nlml.value, val_mse);

    bool improved = false;
    const bool stop =
        early_stop_update(stop_state, epoch, val_mse, cfg.patience, &improved);
    if (improved) {
      best_lstm = model.lstm;
      best_rbf = model.rbf;
    }
    if (stop) break;
    (void)n;
  }

  model.lstm = best_lstm;
  model.rbf = best_rbf;
  refresh_model(model);

  result.model = std::move(model);
  result.best_epoch = stop_state.best_epoch;
  result.best_val_mse = stop_state.best_mse;
  return result;
}

GridResult grid_search(const GridSpec& grid, FeatureKind kind,
                       const std::vector<Sample>& train,
                       const std::vector<Sample>& val,
                       const TrainConfig& cfg) {
  if (grid.length_scales.empty() || grid.signal_vars.empty() ||
      grid.noise_vars.empty()) {
    throw InputError("grid_search: empty grid");
  }

  TrainConfig short_cfg = cfg;
  short_cfg.max_epochs = cfg.grid_epochs;

  GridResult result;
  bool have_best = false;
  double best_mse = 0.0;

  for (double l : grid.length_scales) {
    for (double sf2 : grid.signal_vars) {
      for (double sn2 : grid.noise_vars) {
        GridEntry entry;
        entry.hp = RbfHyperparams::from_natural(l, sf2, sn2);
        try {
          const DeepGpModel m =
              make_model(kind, entry.hp, train, cfg.rng_seed, cfg.hidden_dim);
          const TrainResult r = train_joint(m, train, val, short_cfg);
          entry.val_mse = r.best_val_mse;
        } catch (const NumericError&) {
          entry.failed = true;
        }
        if (!entry.failed && std::isfinite(entry.val_mse) &&
            (!have_best || entry.val_mse < best_mse)) {
          best_mse = entry.val_mse;
          result.best = entry.hp;
          have_best = true;
        }
        result.table.push_back(entry);
      }
    }
  }
  if (!have_best) throw NumericError("grid exhausted");
  return result;
}

}  // namespace dkgp
