#pragma once

#include <random>
#include <vector>

#include "odecast/ode.hpp"
#include "odecast/tensor.hpp"

// Gated multi-kernel dilated temporal convolution and the padding/truncation
// machinery of the continuous temporal aggregation (CTA) process.

namespace odecast {

// One set of convolution parameters, reused at every aggregation step. Each
// kernel width contributes channels/|widths| output channels; the branches
// are concatenated back to the full channel count.
struct TcnParams {
  struct Branch {
    std::size_t width = 2;
    Tensor filter_w, filter_b;  // [C/_ x C x m], [C/_]
    Tensor gate_w, gate_b;
  };
  std::vector<Branch> branches;

  static TcnParams init(std::size_t channels, const std::vector<std::size_t>& widths,
                        std::mt19937_64& rng);
  static TcnParams zeros(std::size_t channels, const std::vector<std::size_t>& widths);
  std::size_t max_width() const;
  std::vector<Tensor> parameters() const;
};

// r = 1: R = L(k-1) + 1; r > 1: R = 1 + (k-1)(r^L - 1)/(r - 1).
long long receptive_field(long long r, long long k, long long layers);

// delta = floor(r^step_index); exact for integer r.
long long dilation_at(long long r, long long step_index);

struct CtaSchedule {
  long long dilation_factor = 2;
  std::vector<std::size_t> widths;
  SolverSpec spec;
  long long receptive = 0;

  static CtaSchedule make(long long dilation_factor, std::vector<std::size_t> widths,
                          SolverSpec spec);
  // Informative slots left after `steps` aggregation steps, starting from the
  // full receptive field; exactly 1 after spec.steps() steps.
  long long informative_after(int steps) const;
};

// Per width m: tanh(conv) * sigmoid(conv), truncated to the widest branch's
// output length Q - dilation*(max_width-1), concatenated over channels.
Tensor gated_tcn(const Tensor& h, const TcnParams& params, std::size_t dilation);

// dH/dt for the temporal ODE without the interior graph process:
// pad_left_zero(gated_tcn(H, params, dilation_at(r, step)), R).
Tensor cta_field_plain(const Tensor& h, int step_index, const TcnParams& params,
                       const CtaSchedule& schedule);

}  // namespace odecast
