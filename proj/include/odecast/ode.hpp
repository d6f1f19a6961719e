#pragma once

#include <functional>
#include <vector>

#include "odecast/tensor.hpp"

// Fixed-step integration of user-supplied vector fields. Both solvers are
// unrolled through the autodiff tape, so gradients flow through every step
// (discretize-then-optimize).

namespace odecast {

struct SolverSpec {
  enum class Method { euler, rk4 };

  Method method = Method::euler;
  double terminal_time = 1.0;
  double step_size = 1.0;

  // Number of grid steps K = terminal_time / step_size; throws ContractError
  // unless that ratio is a positive integer within 1e-9.
  int steps() const;
  void validate() const { (void)steps(); }

  static SolverSpec euler(double terminal_time, double step_size) {
    return {Method::euler, terminal_time, step_size};
  }
  static SolverSpec rk4(double terminal_time, double step_size) {
    return {Method::rk4, terminal_time, step_size};
  }
};

// The field sees the integer step index, not continuous time: schedules that
// change per aggregation step (dilation) stay constant across RK4 stages.
using VectorField = std::function<Tensor(const Tensor& state, int step_index)>;

// State at terminal_time after K steps.
Tensor integrate(const VectorField& field, const Tensor& h0, const SolverSpec& spec);

// All grid states [H(0), H(dt), ..., H(K dt)]; the last element is bitwise
// identical to what integrate() returns.
std::vector<Tensor> integrate_trajectory(const VectorField& field, const Tensor& h0,
                                         const SolverSpec& spec);

}  // namespace odecast
