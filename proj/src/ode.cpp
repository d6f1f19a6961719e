#include "odecast/ode.hpp"

#include <cmath>
#include <string>

namespace odecast {

int SolverSpec::steps() const {
  if (!(terminal_time > 0.0) || !(step_size > 0.0)) {
    throw ContractError("SolverSpec: terminal_time and step_size must be positive");
  }
  if (step_size > terminal_time * (1.0 + 1e-9)) {
    throw ContractError("SolverSpec: step_size exceeds terminal_time");
  }
  const double k = terminal_time / step_size;
  const double rounded = std::round(k);
  if (rounded < 1.0 || std::abs(k - rounded) > 1e-9 * std::max(1.0, rounded)) {
    throw ContractError("SolverSpec: terminal_time/step_size = " + std::to_string(k) +
                        " is not a positive integer");
  }
  return static_cast<int>(rounded);
}

namespace {

Tensor eval_field(const VectorField& field, const Tensor& state, int step) {
  Tensor out = field(state, step);
  if (!out.defined() || out.shape() != state.shape()) {
    throw DimensionError("integrate: field changed state shape from " +
                         shape_str(state.shape()) + " to " +
                         (out.defined() ? shape_str(out.shape()) : std::string("undefined")));
  }
  return out;
}

Tensor advance(const VectorField& field, const Tensor& h, int step, double dt,
               SolverSpec::Method method) {
  if (method == SolverSpec::Method::euler) {
    return add(h, scale(eval_field(field, h, step), dt));
  }
  // classical 4-stage Runge-Kutta
  Tensor k1 = eval_field(field, h, step);
  Tensor k2 = eval_field(field, add(h, scale(k1, dt / 2.0)), step);
  Tensor k3 = eval_field(field, add(h, scale(k2, dt / 2.0)), step);
  Tensor k4 = eval_field(field, add(h, scale(k3, dt)), step);
  Tensor incr = add(add(k1, scale(add(k2, k3), 2.0)), k4);
  return add(h, scale(incr, dt / 6.0));
}

}  // namespace

Tensor integrate(const VectorField& field, const Tensor& h0, const SolverSpec& spec) {
  const int k = spec.steps();
  Tensor h = h0;
  for (int i = 0; i < k; ++i) h = advance(field, h, i, spec.step_size, spec.method);
  return h;
}

std::vector<Tensor> integrate_trajectory(const VectorField& field, const Tensor& h0,
                                         const SolverSpec& spec) {
  const int k = spec.steps();
  std::vector<Tensor> states;
  states.reserve(static_cast<std::size_t>(k) + 1);
  states.push_back(h0);
  for (int i = 0; i < k; ++i) {
    states.push_back(advance(field, states.back(), i, spec.step_size, spec.method));
  }
  return states;
}

}  // namespace odecast
