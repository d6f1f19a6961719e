#include "odecast/metrics.hpp"

#include <cmath>
#include <sstream>

#include "odecast/tensor.hpp"

namespace odecast {

SingleStepMetrics single_step_metrics(const std::vector<double>& pred,
                                      const std::vector<double>& truth, std::size_t rows,
                                      std::size_t cols) {
  if (pred.size() != rows * cols || truth.size() != rows * cols) {
    throw DimensionError("single_step_metrics: size mismatch");
  }
  if (rows < 2) throw ContractError("single_step_metrics: need at least 2 rows");

  double mean = 0.0;
  for (double v : truth) mean += v;
  mean /= static_cast<double>(truth.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = pred[i] - truth[i];
    num += d * d;
    const double c = truth[i] - mean;
    den += c * c;
  }
  if (den <= 0.0) throw ContractError("single_step_metrics: truth has zero variance");

  double corr_sum = 0.0;
  std::size_t corr_count = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    double mp = 0.0, mt = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      mp += pred[r * cols + c];
      mt += truth[r * cols + c];
    }
    mp /= static_cast<double>(rows);
    mt /= static_cast<double>(rows);
    double spp = 0.0, stt = 0.0, spt = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const double dp = pred[r * cols + c] - mp;
      const double dt = truth[r * cols + c] - mt;
      spp += dp * dp;
      stt += dt * dt;
      spt += dp * dt;
    }
    if (stt <= 1e-300) continue;  // zero-variance variable in the ground truth
    // a flat prediction of a varying variable counts as uncorrelated
    corr_sum += spp <= 1e-300 ? 0.0 : spt / std::sqrt(spp * stt);
    ++corr_count;
  }
  if (corr_count == 0) throw ContractError("single_step_metrics: all variables zero-variance");

  SingleStepMetrics out;
  out.rse = std::sqrt(num) / std::sqrt(den);
  out.corr = corr_sum / static_cast<double>(corr_count);
  out.samples = rows;
  return out;
}

MultiStepMetrics multi_step_metrics(const std::vector<double>& pred,
                                    const std::vector<double>& truth, std::size_t rows,
                                    std::size_t cols, double mask_threshold) {
  if (pred.size() != rows * cols || truth.size() != rows * cols) {
    throw DimensionError("multi_step_metrics: size mismatch");
  }
  const bool masked = mask_threshold >= 0.0;
  double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
  std::size_t used = 0, pct_used = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (masked && !(std::abs(truth[i]) > mask_threshold)) continue;
    const double d = pred[i] - truth[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
    ++used;
    if (truth[i] != 0.0) {
      pct_sum += std::abs(d / truth[i]);
      ++pct_used;
    }
  }
  if (used == 0) throw ContractError("multi_step_metrics: every cell is masked");
  MultiStepMetrics out;
  out.mae = abs_sum / static_cast<double>(used);
  out.rmse = std::sqrt(sq_sum / static_cast<double>(used));
  out.mape = pct_used > 0 ? 100.0 * pct_sum / static_cast<double>(pct_used) : 0.0;
  out.used_cells = used;
  return out;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["protocol"] = protocol;
  j["variant"] = variant;
  j["rows"] = nlohmann::json::array();
  for (const Row& row : rows) {
    nlohmann::json r;
    r["horizon"] = row.horizon;
    r["samples"] = row.samples;
    for (const auto& [k, v] : row.values) r[k] = v;
    j["rows"].push_back(std::move(r));
  }
  return j;
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "protocol,variant,horizon,samples";
  if (!rows.empty()) {
    for (const auto& [k, v] : rows.front().values) os << ',' << k;
  }
  os << '\n';
  for (const Row& row : rows) {
    os << protocol << ',' << variant << ',' << row.horizon << ',' << row.samples;
    for (const auto& [k, v] : row.values) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace odecast
