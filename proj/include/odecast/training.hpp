#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odecast/data.hpp"
#include "odecast/model.hpp"

// The optimization loop: Adam updates, learning-rate decay, epoch/batch
// iteration over shuffled windows, best-validation checkpointing.

namespace odecast {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
public:
  Adam(std::vector<Tensor> params, AdamConfig config = {});

  // Standard bias-corrected update from the grads populated by backward().
  void step();
  void zero_grad();
  void set_learning_rate(double lr) { config_.lr = lr; }
  double learning_rate() const { return config_.lr; }
  long long step_count() const { return steps_; }

private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  AdamConfig config_;
  long long steps_ = 0;
};

// Multiplicative decay: base_lr * gamma^floor(epoch / step_every); gamma = 1
// disables decay. Epochs count from 1.
double lr_schedule(double base_lr, int epoch, double gamma, int step_every);

// Scales grads so their global L2 norm is at most max_norm; returns the norm
// measured before clipping. Never increases the norm.
double clip_global_norm(const std::vector<Tensor>& params, double max_norm);

struct TrainRun {
  int epochs = 5;
  std::size_t batch_size = 16;
  double base_lr = 1e-3;
  double decay_gamma = 1.0;
  int decay_step = 10;
  double clip_norm = 5.0;  // <= 0 disables clipping
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double train_mae = 0.0;
  double val_mae = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val = 0.0;
};

// Raised when the loss turns non-finite; carries the diagnostic state.
class TrainingDiverged : public std::runtime_error {
public:
  TrainingDiverged(const std::string& msg, long long step, double lr, double grad_norm)
      : std::runtime_error(msg), step(step), lr(lr), grad_norm(grad_norm) {}
  long long step;
  double lr;
  double grad_norm;
};

// Algorithm: per epoch, shuffle windows, iterate batches (forward, MAE,
// backward, clip, Adam), then decay the learning rate. The model ends up
// holding the best-validation parameters. Deterministic for a fixed seed.
TrainResult train(Model& model, const WindowDataset& train_data, const WindowDataset& val_data,
                  const TrainRun& run);

// Mean forward MAE over a dataset (no dropout).
double evaluate_mae(const Model& model, const WindowDataset& data, std::size_t batch_size = 64);

std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace odecast
