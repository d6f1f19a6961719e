#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Dense float64 tensors with reverse-mode automatic differentiation.
// Ops record the computation graph during the forward pass; backward()
// replays it in reverse topological order and accumulates into the grad
// buffers of every tensor created with requires_grad.

namespace odecast {

// Shape/size preconditions that do not hold.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// API contracts that do not hold (non-scalar backward, bad solver spec, ...).
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty unless requires_grad
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<TensorNode>> parents;
  // Accumulates self.grad into the grads of participating parents.
  std::function<void(TensorNode&)> backward_fn;
};

}  // namespace detail

class Tensor {
public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor identity(std::size_t n, bool requires_grad = false);
  // Entries drawn i.i.d. uniform on [lo, hi).
  static Tensor uniform(Shape shape, double lo, double hi,
                        std::mt19937_64& rng, bool requires_grad = false);
  // Entries drawn i.i.d. standard normal scaled by sigma.
  static Tensor normal(Shape shape, double sigma, std::mt19937_64& rng,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t dim(int axis) const;  // negative axes count from the back

  const std::vector<double>& values() const;
  std::vector<double>& values();  // in-place edits are for leaf tensors only
  const std::vector<double>& grad() const;
  bool requires_grad() const;

  double item() const;  // defined for single-element tensors
  double at(std::initializer_list<std::size_t> index) const;

  void zero_grad();
  // Reverse-mode sweep from a scalar. Leaf grads accumulate across calls;
  // grads of parameters that do not reach the loss stay exactly zero.
  void backward() const;

  std::shared_ptr<detail::TensorNode> node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::TensorNode> node)
      : node_(std::move(node)) {}

private:
  std::shared_ptr<detail::TensorNode> node_;
};

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);

// Inverted-scaling dropout; identity when rate == 0. The mask is drawn from
// `rng`, so a fixed seed gives a bitwise-reproducible forward pass.
Tensor dropout(const Tensor& a, double rate, std::mt19937_64& rng);

// ---- linear algebra (rank-2 operands) ----
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// ---- structured ops ----
// out[..., n, d, q] = sum_m adj[n, m] * h[..., m, d, q]; the node axis sits
// at rank-3 from the back, any leading axes are batch.
Tensor propagate_nodes(const Tensor& adj, const Tensor& h);

// Valid (no implicit padding) causal convolution along the last axis with
// kernel taps ordered past -> current. h is [..., C_in, Q], w is
// [C_out, C_in, m], bias is [C_out] (may be undefined). Output length is
// Q - dilation*(m-1).
Tensor conv1d_dilated(const Tensor& h, const Tensor& w, const Tensor& bias,
                      std::size_t dilation);

// out[..., e, q] = sum_c h[..., c, q] * w[c, e] (+ bias[e]); a 1x1
// convolution over the channel axis at rank-2 from the back.
Tensor feature_linear(const Tensor& h, const Tensor& w, const Tensor& bias);

// Keep the trailing `keep` slots of the last axis.
Tensor truncate_last(const Tensor& h, std::size_t keep);
// Left-pad the last axis with zeros up to `padded_len`.
Tensor pad_left_zero(const Tensor& h, std::size_t padded_len);
// Concatenate along the channel axis at rank-2 from the back.
Tensor concat_channels(const std::vector<Tensor>& parts);

// Row-normalize with an implicit self-loop: out = (A + I) / rowsum(A + I).
Tensor normalize_rows_selfloop(const Tensor& adj);

// ---- reductions / reshaping ----
Tensor reshape(const Tensor& a, Shape shape);
Tensor sum_all(const Tensor& a);
// mean |pred - target| over all elements; subgradient 0 at exact ties.
Tensor mean_abs_error(const Tensor& pred, const Tensor& target);

}  // namespace odecast
