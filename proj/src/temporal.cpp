#include "odecast/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace odecast {

TcnParams TcnParams::init(std::size_t channels, const std::vector<std::size_t>& widths,
                          std::mt19937_64& rng) {
  if (widths.empty()) throw ContractError("TcnParams: widths must be non-empty");
  if (channels % widths.size() != 0) {
    throw ContractError("TcnParams: channels " + std::to_string(channels) +
                        " not divisible by " + std::to_string(widths.size()) + " widths");
  }
  const std::size_t out_c = channels / widths.size();
  TcnParams p;
  for (std::size_t m : widths) {
    if (m < 1) throw ContractError("TcnParams: kernel width must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(channels * m));
    Branch b;
    b.width = m;
    b.filter_w = Tensor::uniform({out_c, channels, m}, -bound, bound, rng, true);
    b.filter_b = Tensor::uniform({out_c}, -bound, bound, rng, true);
    b.gate_w = Tensor::uniform({out_c, channels, m}, -bound, bound, rng, true);
    b.gate_b = Tensor::uniform({out_c}, -bound, bound, rng, true);
    p.branches.push_back(std::move(b));
  }
  return p;
}

TcnParams TcnParams::zeros(std::size_t channels, const std::vector<std::size_t>& widths) {
  std::mt19937_64 rng(0);
  TcnParams p = init(channels, widths, rng);
  for (Tensor& t : p.parameters()) std::fill(t.values().begin(), t.values().end(), 0.0);
  return p;
}

std::size_t TcnParams::max_width() const {
  std::size_t m = 0;
  for (const Branch& b : branches) m = std::max(m, b.width);
  return m;
}

std::vector<Tensor> TcnParams::parameters() const {
  std::vector<Tensor> out;
  for (const Branch& b : branches) {
    out.push_back(b.filter_w);
    out.push_back(b.filter_b);
    out.push_back(b.gate_w);
    out.push_back(b.gate_b);
  }
  return out;
}

long long receptive_field(long long r, long long k, long long layers) {
  if (r < 1 || k < 2 || layers < 1) {
    throw ContractError("receptive_field: need r >= 1, k >= 2, L >= 1");
  }
  if (r == 1) return layers * (k - 1) + 1;
  long long geom = 0, pw = 1;  // (r^L - 1)/(r - 1) = sum_{i<L} r^i
  for (long long i = 0; i < layers; ++i) {
    geom += pw;
    pw *= r;
  }
  return 1 + (k - 1) * geom;
}

long long dilation_at(long long r, long long step_index) {
  if (r < 1 || step_index < 0) throw ContractError("dilation_at: need r >= 1, step >= 0");
  long long d = 1;
  for (long long i = 0; i < step_index; ++i) d *= r;
  return d;
}

CtaSchedule CtaSchedule::make(long long dilation_factor, std::vector<std::size_t> widths,
                              SolverSpec spec) {
  CtaSchedule s;
  s.dilation_factor = dilation_factor;
  s.widths = std::move(widths);
  s.spec = spec;
  std::size_t max_w = 0;
  for (std::size_t w : s.widths) max_w = std::max(max_w, w);
  s.receptive = receptive_field(dilation_factor, static_cast<long long>(max_w), spec.steps());
  return s;
}

long long CtaSchedule::informative_after(int steps) const {
  std::size_t max_w = 0;
  for (std::size_t w : widths) max_w = std::max(max_w, w);
  long long len = receptive;
  for (int i = 0; i < steps; ++i) {
    len -= dilation_at(dilation_factor, i) * (static_cast<long long>(max_w) - 1);
  }
  return len;
}

Tensor gated_tcn(const Tensor& h, const TcnParams& params, std::size_t dilation) {
  if (params.branches.empty()) throw ContractError("gated_tcn: empty parameter set");
  const std::size_t q = h.dim(-1);
  const std::size_t span = dilation * (params.max_width() - 1);
  if (q < span + 1) {
    throw DimensionError("gated_tcn: time axis " + std::to_string(q) +
                         " too short for max kernel width " +
                         std::to_string(params.max_width()) + " at dilation " +
                         std::to_string(dilation));
  }
  const std::size_t q_out = q - span;
  std::vector<Tensor> parts;
  parts.reserve(params.branches.size());
  for (const auto& b : params.branches) {
    Tensor filt = tanh(conv1d_dilated(h, b.filter_w, b.filter_b, dilation));
    Tensor gate = sigmoid(conv1d_dilated(h, b.gate_w, b.gate_b, dilation));
    parts.push_back(truncate_last(mul(filt, gate), q_out));
  }
  return parts.size() == 1 ? parts.front() : concat_channels(parts);
}

Tensor cta_field_plain(const Tensor& h, int step_index, const TcnParams& params,
                       const CtaSchedule& schedule) {
  const std::size_t delta =
      static_cast<std::size_t>(dilation_at(schedule.dilation_factor, step_index));
  Tensor mixed = gated_tcn(h, params, delta);
  return pad_left_zero(mixed, static_cast<std::size_t>(schedule.receptive));
}

}  // namespace odecast
