#include "odecast/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace odecast {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const Tensor& p : params_) {
    if (!p.requires_grad()) throw ContractError("Adam: parameter does not require grad");
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++steps_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    const auto& g = p.grad();
    auto& vals = p.values();
    for (std::size_t j = 0; j < vals.size(); ++j) {
      m_[i][j] = config_.beta1 * m_[i][j] + (1.0 - config_.beta1) * g[j];
      v_[i][j] = config_.beta2 * v_[i][j] + (1.0 - config_.beta2) * g[j] * g[j];
      const double m_hat = m_[i][j] / bc1;
      const double v_hat = v_[i][j] / bc2;
      vals[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

double lr_schedule(double base_lr, int epoch, double gamma, int step_every) {
  if (epoch < 1) throw ContractError("lr_schedule: epochs count from 1");
  if (step_every < 1 || gamma == 1.0) return base_lr;
  return base_lr * std::pow(gamma, static_cast<double>(epoch / step_every));
}

double clip_global_norm(const std::vector<Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (const Tensor& p : params) {
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (const Tensor& p : params) {
      for (double& g : p.node()->grad) g *= s;
    }
  }
  return norm;
}

namespace {

std::vector<std::vector<double>> snapshot(const std::vector<Tensor>& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const Tensor& p : params) out.push_back(p.values());
  return out;
}

void restore(std::vector<Tensor>& params, const std::vector<std::vector<double>>& snap) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].values() = snap[i];
}

}  // namespace

double evaluate_mae(const Model& model, const WindowDataset& data, std::size_t batch_size) {
  if (data.size() == 0) throw ContractError("evaluate_mae: empty dataset");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, data.size());
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    Tensor pred = model.forward(data.inputs(idx));
    Tensor target = data.targets(idx);
    total += loss_mae(pred, target).item() * static_cast<double>(idx.size());
    count += idx.size();
  }
  return total / static_cast<double>(count);
}

TrainResult train(Model& model, const WindowDataset& train_data, const WindowDataset& val_data,
                  const TrainRun& run) {
  if (train_data.size() == 0) throw ContractError("train: no training windows");
  if (val_data.size() == 0) throw ContractError("train: no validation windows");

  std::vector<Tensor> params = model.parameters();
  Adam opt(params, AdamConfig{run.base_lr});
  std::mt19937_64 shuffle_rng(run.seed);
  std::mt19937_64 dropout_rng(run.seed ^ 0x9e3779b97f4a7c15ULL);

  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params = snapshot(params);

  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= run.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += run.batch_size) {
      const std::size_t end = std::min(begin + run.batch_size, order.size());
      std::vector<std::size_t> batch(order.begin() + begin, order.begin() + end);
      Tensor pred = model.forward(train_data.inputs(batch), true, &dropout_rng);
      Tensor loss = loss_mae(pred, train_data.targets(batch));
      const double loss_value = loss.item();
      opt.zero_grad();
      loss.backward();
      const double grad_norm = clip_global_norm(params, run.clip_norm);
      if (!std::isfinite(loss_value)) {
        std::ostringstream msg;
        msg << "training diverged: non-finite loss at step " << opt.step_count() + 1
            << " (epoch " << epoch << ", lr " << opt.learning_rate() << ", grad norm "
            << grad_norm << ")";
        throw TrainingDiverged(msg.str(), opt.step_count() + 1, opt.learning_rate(), grad_norm);
      }
      opt.step();
      epoch_loss += loss_value * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = opt.learning_rate();
    stats.train_mae = epoch_loss / static_cast<double>(seen);
    stats.val_mae = evaluate_mae(model, val_data);
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(stats);

    if (stats.val_mae < result.best_val) {
      result.best_val = stats.val_mae;
      result.best_epoch = epoch;
      best_params = snapshot(params);
    }
    opt.set_learning_rate(lr_schedule(run.base_lr, epoch + 1, run.decay_gamma, run.decay_step));
  }

  if (run.epochs > 0) restore(params, best_params);
  return result;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os.precision(12);
  os << "epoch,lr,train_mae,val_mae,wall_seconds\n";
  for (const EpochStats& e : history) {
    os << e.epoch << ',' << e.lr << ',' << e.train_mae << ',' << e.val_mae << ','
       << e.wall_seconds << '\n';
  }
  return os.str();
}

}  // namespace odecast
