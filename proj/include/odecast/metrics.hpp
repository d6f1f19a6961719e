#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

// Evaluation metrics for both protocols: RSE/CORR for single-step runs and
// MAE/RMSE/MAPE for multi-step runs. Inputs are row-major T' x N matrices of
// predictions and ground truth.

namespace odecast {

struct SingleStepMetrics {
  double rse = 0.0;
  double corr = 0.0;
  std::size_t samples = 0;
};

// RSE = |pred - truth|_F / |truth - mean(truth)|_F over all cells; CORR is
// the mean per-variable Pearson correlation across time, skipping variables
// where either series has zero variance.
SingleStepMetrics single_step_metrics(const std::vector<double>& pred,
                                      const std::vector<double>& truth, std::size_t rows,
                                      std::size_t cols);

struct MultiStepMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  // percent
  std::size_t used_cells = 0;
};

// Computed over cells with |truth| > mask_threshold. A negative threshold
// disables masking for MAE/RMSE; MAPE then skips exact-zero truth cells.
MultiStepMetrics multi_step_metrics(const std::vector<double>& pred,
                                    const std::vector<double>& truth, std::size_t rows,
                                    std::size_t cols, double mask_threshold = 0.0);

struct MetricReport {
  std::string protocol;  // "single_step" | "multi_step"
  std::string variant = "full";
  struct Row {
    std::size_t horizon = 1;
    std::map<std::string, double> values;
    std::size_t samples = 0;
  };
  std::vector<Row> rows;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // header + one line per horizon
};

}  // namespace odecast
