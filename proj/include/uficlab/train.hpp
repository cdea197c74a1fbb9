#pragma once

#include <string>
#include <vector>

#include "uficlab/dataset.hpp"
#include "uficlab/nn.hpp"

namespace uficlab {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  VectorXd m, v;
  long t = 0;
};

/// One bias-corrected Adam update in place.
void adam_step(AdamState& st, VectorXd& theta, const VectorXd& grad,
               const AdamConfig& cfg);

struct TrainConfig {
  int epochs = 20;
  int iterations_per_epoch = 100;
  int batch_size = 64;
  AdamConfig adam;
  double lr_decay = 1.0;           // per-epoch multiplier on adam.lr, in (0, 1]
  bool keep_best = true;           // return the lowest-validation-error epoch
  double mape_floor = 1e-3;        // denominator floor, normalized-label units
  double divergence_factor = 10.0; // validation blow-up abort threshold
  int val_max_windows = 2000;      // deterministic validation subsample cap
  int grad_chunk = 8;              // windows per gradient chunk (fixed boundaries)
  std::uint64_t seed = 1;

  static TrainConfig from_config(const Config& cfg, const std::string& prefix = "train.");
};

struct EpochStats {
  int epoch = 0;
  double train_mape = 0.0;  // mean over the epoch's batches
  double val_mape = 0.0;
  double wall_s = 0.0;
};

struct TrainResult {
  VectorXd theta;
  std::vector<EpochStats> history;
};

/// Mean relative error of eval-mode predictions over the referenced windows,
/// subsampled with a fixed stride down to at most max_windows.
double evaluate_mape(const TcnModel& model, const VectorXd& theta,
                     const WindowedDataset& ds, const std::vector<WindowRef>& refs,
                     int max_windows, double floor);

/// Minibatch Adam on the floored relative-error loss over normalized labels.
/// Batch composition and dropout streams depend only on cfg.seed, and chunked
/// gradients merge in a fixed order, so results do not depend on thread
/// count. Throws TrainingFault when validation error diverges.
TrainResult train_model(const TcnModel& model, const WindowedDataset& ds,
                        const TrainConfig& cfg);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace uficlab
