#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "odecast/model.hpp"
#include "odecast/tensor.hpp"

// Series ingestion, scaling, chronological splitting, window construction,
// and the synthetic coupled-lag generator used for desk-scale experiments.

namespace odecast {

// Time-major S x N matrix of raw observations.
struct SeriesMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> names;
  std::size_t dropped_nan_rows = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

// Comma-separated float rows, one timestep per row. Rows containing NaN are
// dropped (counted in dropped_nan_rows); ragged rows or unparsable cells are
// hard errors.
SeriesMatrix load_matrix_csv(const std::string& path);
void write_matrix_csv(const SeriesMatrix& m, const std::string& path);

// Contiguous chronological (train, val, test) ranges; fractions must sum to 1
// within 1e-9 and every split must be non-empty.
std::array<SeriesMatrix, 3> split_chronological(const SeriesMatrix& series, double train_frac,
                                                double val_frac, double test_frac);

// Per-variable scaling with statistics fit on the training split only.
struct Scaler {
  enum class Kind { max_abs, z_score };
  Kind kind = Kind::max_abs;
  std::vector<double> offset;  // zero for max_abs
  std::vector<double> denom;

  static Scaler fit(const SeriesMatrix& train, Kind kind);
  SeriesMatrix transform(const SeriesMatrix& m) const;
  SeriesMatrix inverse(const SeriesMatrix& m) const;
  double inverse_value(double v, std::size_t variable) const;
};
Scaler::Kind scaler_kind_from_string(const std::string& s);
std::string to_string(Scaler::Kind kind);

// Sliding windows over a series. Window w covers input rows
// [start, start+T); the single-step target sits at row start+T+H-1 and the
// multi-step target at rows [start+T, start+T+H).
struct WindowDataset {
  std::size_t input_len = 0;
  std::size_t horizon = 1;
  ForecastMode mode = ForecastMode::single_step;
  SeriesMatrix series;
  std::vector<std::size_t> starts;

  std::size_t size() const { return starts.size(); }
  std::size_t nodes() const { return series.cols; }
  std::size_t target_begin(std::size_t w) const;
  std::size_t target_end(std::size_t w) const;  // exclusive

  // [B x N x 1 x T] for the chosen window indices.
  Tensor inputs(const std::vector<std::size_t>& index) const;
  // [B x N x 1] (single-step) or [B x N x 1 x H] (multi-step).
  Tensor targets(const std::vector<std::size_t>& index) const;
  // Last observed value per window and node, the persistence forecast:
  // [B x N].
  std::vector<double> persistence(const std::vector<std::size_t>& index) const;
};

// Every valid start is emitted; an empty dataset (with a warning on stderr)
// when the series is too short.
WindowDataset make_windows(const SeriesMatrix& series, std::size_t input_len,
                           std::size_t horizon, ForecastMode mode);

// ---- synthetic coupled-lag chain ----

struct SynthSpec {
  std::size_t nodes = 5;
  std::size_t steps = 2000;
  std::size_t lag = 3;
  double coupling = 0.9;   // a: weight of the lagged parent series
  double season = 0.05;    // b: weight of the per-node sinusoid
  double noise = 0.02;     // std-dev of the Gaussian innovation
  std::uint64_t seed = 7;
};

struct SynthResult {
  SeriesMatrix series;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // directed u -> v
};

// x_0 is a sinusoid mixture; x_i(t) = a x_{i-1}(t-lag) + b sin(w_i t) + eps.
// Returns the true chain edges (i-1 -> i) for graph-recovery checks.
SynthResult synth_generate(const SynthSpec& spec);

}  // namespace odecast
