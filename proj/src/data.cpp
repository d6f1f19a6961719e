#include "odecast/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace odecast {

SeriesMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  SeriesMatrix m;
  std::string line;
  std::size_t file_row = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++file_row;
    if (line.empty()) continue;
    row.clear();
    std::size_t pos = 0, col = 0;
    bool has_nan = false;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      std::string cell = line.substr(pos, comma - pos);
      ++col;
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing junk");
        if (std::isnan(v)) has_nan = true;
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("'" + path + "': unparsable cell at row " +
                                 std::to_string(file_row) + ", column " + std::to_string(col));
      }
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    if (m.cols == 0) {
      m.cols = row.size();
    } else if (row.size() != m.cols) {
      throw std::runtime_error("'" + path + "': ragged row at row " + std::to_string(file_row) +
                               " (" + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(m.cols) + ")");
    }
    if (has_nan) {
      ++m.dropped_nan_rows;
      continue;
    }
    m.values.insert(m.values.end(), row.begin(), row.end());
    ++m.rows;
  }
  if (m.rows == 0) throw std::runtime_error("'" + path + "': no usable rows");
  m.names.resize(m.cols);
  for (std::size_t c = 0; c < m.cols; ++c) m.names[c] = "x" + std::to_string(c);
  return m;
}

void write_matrix_csv(const SeriesMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.precision(12);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out << ',';
      out << m.at(r, c);
    }
    out << '\n';
  }
}

namespace {

SeriesMatrix slice_rows(const SeriesMatrix& m, std::size_t begin, std::size_t end) {
  SeriesMatrix out;
  out.cols = m.cols;
  out.rows = end - begin;
  out.names = m.names;
  out.values.assign(m.values.begin() + begin * m.cols, m.values.begin() + end * m.cols);
  return out;
}

}  // namespace

std::array<SeriesMatrix, 3> split_chronological(const SeriesMatrix& series, double train_frac,
                                                double val_frac, double test_frac) {
  const double total = train_frac + val_frac + test_frac;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractError("split_chronological: fractions sum to " + std::to_string(total));
  }
  const double s = static_cast<double>(series.rows);
  const auto b1 = static_cast<std::size_t>(std::floor(s * train_frac + 1e-9));
  const auto b2 = static_cast<std::size_t>(std::floor(s * (train_frac + val_frac) + 1e-9));
  if (b1 == 0 || b2 <= b1 || b2 >= series.rows) {
    throw ContractError("split_chronological: a split is empty for S = " +
                        std::to_string(series.rows));
  }
  return {slice_rows(series, 0, b1), slice_rows(series, b1, b2),
          slice_rows(series, b2, series.rows)};
}

Scaler::Kind scaler_kind_from_string(const std::string& s) {
  if (s == "max_abs") return Scaler::Kind::max_abs;
  if (s == "z_score") return Scaler::Kind::z_score;
  throw ContractError("unknown scaler kind '" + s + "'");
}

std::string to_string(Scaler::Kind kind) {
  return kind == Scaler::Kind::max_abs ? "max_abs" : "z_score";
}

Scaler Scaler::fit(const SeriesMatrix& train, Kind kind) {
  Scaler sc;
  sc.kind = kind;
  sc.offset.assign(train.cols, 0.0);
  sc.denom.assign(train.cols, 1.0);
  for (std::size_t c = 0; c < train.cols; ++c) {
    if (kind == Kind::max_abs) {
      double m = 0.0;
      for (std::size_t r = 0; r < train.rows; ++r) m = std::max(m, std::abs(train.at(r, c)));
      sc.denom[c] = m > 0.0 ? m : 1.0;
    } else {
      double mean = 0.0;
      for (std::size_t r = 0; r < train.rows; ++r) mean += train.at(r, c);
      mean /= static_cast<double>(train.rows);
      double var = 0.0;
      for (std::size_t r = 0; r < train.rows; ++r) {
        const double d = train.at(r, c) - mean;
        var += d * d;
      }
      var /= static_cast<double>(train.rows);
      sc.offset[c] = mean;
      sc.denom[c] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  }
  return sc;
}

SeriesMatrix Scaler::transform(const SeriesMatrix& m) const {
  if (m.cols != denom.size()) throw DimensionError("Scaler: column count mismatch");
  SeriesMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out.at(r, c) = (m.at(r, c) - offset[c]) / denom[c];
  return out;
}

SeriesMatrix Scaler::inverse(const SeriesMatrix& m) const {
  if (m.cols != denom.size()) throw DimensionError("Scaler: column count mismatch");
  SeriesMatrix out = m;
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out.at(r, c) = m.at(r, c) * denom[c] + offset[c];
  return out;
}

double Scaler::inverse_value(double v, std::size_t variable) const {
  return v * denom[variable] + offset[variable];
}

std::size_t WindowDataset::target_begin(std::size_t w) const {
  const std::size_t t = starts[w];
  return mode == ForecastMode::single_step ? t + input_len + horizon - 1 : t + input_len;
}

std::size_t WindowDataset::target_end(std::size_t w) const {
  const std::size_t t = starts[w];
  return t + input_len + horizon;  // exclusive
}

Tensor WindowDataset::inputs(const std::vector<std::size_t>& index) const {
  const std::size_t b = index.size(), n = nodes(), t_len = input_len;
  std::vector<double> v(b * n * t_len);
  for (std::size_t w = 0; w < b; ++w) {
    const std::size_t start = starts[index[w]];
    for (std::size_t node = 0; node < n; ++node)
      for (std::size_t t = 0; t < t_len; ++t)
        v[(w * n + node) * t_len + t] = series.at(start + t, node);
  }
  return Tensor::from_values({b, n, 1, t_len}, std::move(v));
}

Tensor WindowDataset::targets(const std::vector<std::size_t>& index) const {
  const std::size_t b = index.size(), n = nodes();
  if (mode == ForecastMode::single_step) {
    std::vector<double> v(b * n);
    for (std::size_t w = 0; w < b; ++w) {
      const std::size_t row = target_begin(index[w]);
      for (std::size_t node = 0; node < n; ++node) v[w * n + node] = series.at(row, node);
    }
    return Tensor::from_values({b, n, 1}, std::move(v));
  }
  std::vector<double> v(b * n * horizon);
  for (std::size_t w = 0; w < b; ++w) {
    const std::size_t row0 = target_begin(index[w]);
    for (std::size_t node = 0; node < n; ++node)
      for (std::size_t h = 0; h < horizon; ++h)
        v[(w * n + node) * horizon + h] = series.at(row0 + h, node);
  }
  return Tensor::from_values({b, n, 1, horizon}, std::move(v));
}

std::vector<double> WindowDataset::persistence(const std::vector<std::size_t>& index) const {
  const std::size_t n = nodes();
  std::vector<double> v(index.size() * n);
  for (std::size_t w = 0; w < index.size(); ++w) {
    const std::size_t last = starts[index[w]] + input_len - 1;
    for (std::size_t node = 0; node < n; ++node) v[w * n + node] = series.at(last, node);
  }
  return v;
}

WindowDataset make_windows(const SeriesMatrix& series, std::size_t input_len,
                           std::size_t horizon, ForecastMode mode) {
  if (input_len < 1 || horizon < 1) throw ContractError("make_windows: T and H must be >= 1");
  WindowDataset ds;
  ds.input_len = input_len;
  ds.horizon = horizon;
  ds.mode = mode;
  ds.series = series;
  const std::size_t need = input_len + horizon;
  if (series.rows < need) {
    std::cerr << "make_windows: series of " << series.rows << " rows is too short for T="
              << input_len << ", H=" << horizon << "; no windows emitted\n";
    return ds;
  }
  const std::size_t count = series.rows - need + 1;
  ds.starts.resize(count);
  for (std::size_t i = 0; i < count; ++i) ds.starts[i] = i;
  return ds;
}

SynthResult synth_generate(const SynthSpec& spec) {
  if (spec.nodes < 2) throw ContractError("synth_generate: need at least 2 nodes");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr double two_pi = 6.283185307179586476925286766559;

  const std::size_t warmup = spec.nodes * std::max<std::size_t>(spec.lag, 1);
  const std::size_t total = warmup + spec.steps;
  std::vector<std::vector<double>> x(spec.nodes, std::vector<double>(total, 0.0));

  // Source series: two incommensurate sinusoids plus a harmonic.
  for (std::size_t t = 0; t < total; ++t) {
    const double tt = static_cast<double>(t);
    x[0][t] = std::sin(two_pi * tt / 24.0) + 0.5 * std::sin(two_pi * tt / 75.0 + 0.8) +
              0.2 * std::sin(two_pi * tt / 12.0);
  }
  for (std::size_t i = 1; i < spec.nodes; ++i) {
    const double omega = two_pi / (20.0 + 3.0 * static_cast<double>(i));
    for (std::size_t t = 0; t < total; ++t) {
      const double lagged = t >= spec.lag ? x[i - 1][t - spec.lag] : 0.0;
      x[i][t] = spec.coupling * lagged +
                spec.season * std::sin(omega * static_cast<double>(t)) +
                spec.noise * gauss(rng);
    }
  }

  SynthResult out;
  out.series.rows = spec.steps;
  out.series.cols = spec.nodes;
  out.series.values.resize(spec.steps * spec.nodes);
  for (std::size_t t = 0; t < spec.steps; ++t)
    for (std::size_t i = 0; i < spec.nodes; ++i)
      out.series.at(t, i) = x[i][warmup + t];
  out.series.names.resize(spec.nodes);
  for (std::size_t i = 0; i < spec.nodes; ++i) out.series.names[i] = "x" + std::to_string(i);
  for (std::size_t i = 1; i < spec.nodes; ++i) out.edges.emplace_back(i - 1, i);
  return out;
}

}  // namespace odecast
