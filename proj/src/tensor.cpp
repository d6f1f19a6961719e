#include "odecast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace odecast {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << 'x';
    os << s[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

namespace {

NodePtr make_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->values.size(), 0.0);
  return node;
}

// Result node of a recorded op; allocates a grad buffer when any parent
// participates in differentiation.
Tensor make_op(Shape shape, std::vector<double> values,
               std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->is_leaf = false;
  for (const Tensor& p : parents) {
    node->parents.push_back(p.node());
    if (p.node()->requires_grad) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->grad.assign(node->values.size(), 0.0);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(node);
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

bool wants(const NodePtr& n) { return n->requires_grad; }

// Product of all dims before axis `from` (counted from the front).
std::size_t leading_count(const Shape& s, std::size_t from_back) {
  std::size_t n = 1;
  for (std::size_t i = 0; i + from_back < s.size(); ++i) n *= s[i];
  return n;
}

}  // namespace

// ---------------------------------------------------------------- Tensor ---

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(shape_numel(shape), 0.0);
  return Tensor(make_leaf(std::move(shape), std::move(v), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(shape_numel(shape), value);
  return Tensor(make_leaf(std::move(shape), std::move(v), requires_grad));
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({1}, {value}, requires_grad);
}

Tensor Tensor::identity(std::size_t n, bool requires_grad) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return from_values({n, n}, std::move(v), requires_grad);
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, std::mt19937_64& rng,
                       bool requires_grad) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = dist(rng);
  return from_values(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::normal(Shape shape, double sigma, std::mt19937_64& rng,
                      bool requires_grad) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = sigma * dist(rng);
  return from_values(std::move(shape), std::move(v), requires_grad);
}

const Shape& Tensor::shape() const {
  require_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::size() const { return shape_numel(shape()); }

std::size_t Tensor::dim(int axis) const {
  const Shape& s = shape();
  int r = static_cast<int>(s.size());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  }
  return s[static_cast<std::size_t>(axis)];
}

const std::vector<double>& Tensor::values() const {
  require_defined(*this, "values");
  return node_->values;
}

std::vector<double>& Tensor::values() {
  require_defined(*this, "values");
  return node_->values;
}

const std::vector<double>& Tensor::grad() const {
  require_defined(*this, "grad");
  if (!node_->requires_grad) throw ContractError("grad: tensor does not require grad");
  return node_->grad;
}

bool Tensor::requires_grad() const {
  require_defined(*this, "requires_grad");
  return node_->requires_grad;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item: tensor has " + std::to_string(size()) + " elements");
  return node_->values[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
  const Shape& s = shape();
  if (index.size() != s.size()) {
    throw DimensionError("at: index rank " + std::to_string(index.size()) +
                         " does not match " + shape_str(s));
  }
  std::size_t flat = 0, i = 0;
  for (std::size_t ix : index) {
    if (ix >= s[i]) throw DimensionError("at: index out of range");
    flat = flat * s[i] + ix;
    ++i;
  }
  return node_->values[flat];
}

void Tensor::zero_grad() {
  require_defined(*this, "zero_grad");
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::backward() const {
  require_defined(*this, "backward");
  if (size() != 1) {
    throw ContractError("backward: loss must be a scalar, got " + shape_str(shape()));
  }
  if (!node_->requires_grad) return;  // nothing participates

  // Iterative reverse topological order over the recorded graph.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [cur, next] = stack.back();
    if (next < cur->parents.size()) {
      TensorNode* p = cur->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(cur);
      stack.pop_back();
    }
  }
  // Interior grads are scratch for this sweep; leaf grads accumulate.
  for (TensorNode* n : order) {
    if (!n->is_leaf) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

// ----------------------------------------------------------- elementwise ---

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
    for (int k = 0; k < 2; ++k) {
      auto& p = self.parents[k];
      if (!wants(p)) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_defined(a, "sub");
  require_defined(b, "sub");
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
    if (wants(self.parents[0])) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) self.parents[0]->grad[i] += self.grad[i];
    }
    if (wants(self.parents[1])) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) self.parents[1]->grad[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    if (wants(pa)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * pb->values[i];
    }
    if (wants(pb)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i] * pa->values[i];
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  require_defined(a, "scale");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * av[i];
  return make_op(a.shape(), std::move(out), {a}, [c](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += c * self.grad[i];
  });
}

namespace {

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& a, const char* name, Fwd fwd, Bwd dfdy) {
  require_defined(a, name);
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  return make_op(a.shape(), std::move(out), {a}, [dfdy](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p->grad[i] += self.grad[i] * dfdy(p->values[i], self.values[i]);
    }
  });
}

}  // namespace

Tensor tanh(const Tensor& a) {
  return unary_op(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
  return unary_op(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor dropout(const Tensor& a, double rate, std::mt19937_64& rng) {
  require_defined(a, "dropout");
  if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout: rate must be in [0,1)");
  if (rate == 0.0) return a;
  const double keep = 1.0 - rate;
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  auto mask = std::make_shared<std::vector<double>>(a.size());
  for (double& m : *mask) m = dist(rng) < keep ? 1.0 / keep : 0.0;
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * (*mask)[i];
  return make_op(a.shape(), std::move(out), {a}, [mask](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i] * (*mask)[i];
  });
}

// --------------------------------------------------------- linear algebra ---

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      const double s = av[i * k + l];
      if (s == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += s * bv[l * n + j];
    }
  return make_op({m, n}, std::move(out), {a, b}, [m, k, n](TensorNode& self) {
    auto& pa = self.parents[0];
    auto& pb = self.parents[1];
    if (wants(pa)) {  // dA = G B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += self.grad[i * n + j] * pb->values[l * n + j];
          pa->grad[i * k + l] += acc;
        }
    }
    if (wants(pb)) {  // dB = A^T G
      for (std::size_t l = 0; l < k; ++l)
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += pa->values[i * k + l] * self.grad[i * n + j];
          pb->grad[l * n + j] += acc;
        }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  if (a.rank() != 2) throw DimensionError("transpose: expected rank-2, got " + shape_str(a.shape()));
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  const auto& av = a.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return make_op({n, m}, std::move(out), {a}, [m, n](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) p->grad[i * n + j] += self.grad[j * m + i];
  });
}

// ---------------------------------------------------------- structured ops ---

Tensor propagate_nodes(const Tensor& adj, const Tensor& h) {
  require_defined(adj, "propagate_nodes");
  require_defined(h, "propagate_nodes");
  if (adj.rank() != 2 || adj.dim(0) != adj.dim(1)) {
    throw DimensionError("propagate_nodes: adjacency must be square, got " + shape_str(adj.shape()));
  }
  if (h.rank() < 3) {
    throw DimensionError("propagate_nodes: state must have rank >= 3, got " + shape_str(h.shape()));
  }
  const std::size_t n = adj.dim(0);
  if (h.dim(-3) != n) {
    throw DimensionError("propagate_nodes: node axis " + std::to_string(h.dim(-3)) +
                         " does not match adjacency " + shape_str(adj.shape()));
  }
  const std::size_t batch = leading_count(h.shape(), 3);
  const std::size_t inner = h.dim(-2) * h.dim(-1);  // feature x time slab
  std::vector<double> out(h.size(), 0.0);
  const auto& av = adj.values();
  const auto& hv = h.values();
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * n * inner;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m) {
        const double w = av[i * n + m];
        if (w == 0.0) continue;
        const double* src = hv.data() + base + m * inner;
        double* dst = out.data() + base + i * inner;
        for (std::size_t x = 0; x < inner; ++x) dst[x] += w * src[x];
      }
  }
  return make_op(h.shape(), std::move(out), {adj, h}, [n, batch, inner](TensorNode& self) {
    auto& pa = self.parents[0];
    auto& ph = self.parents[1];
    if (wants(pa)) {  // dA[i,m] = sum_{b,x} G[b,i,x] H[b,m,x]
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t base = b * n * inner;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t m = 0; m < n; ++m) {
            const double* g = self.grad.data() + base + i * inner;
            const double* hv = ph->values.data() + base + m * inner;
            double acc = 0.0;
            for (std::size_t x = 0; x < inner; ++x) acc += g[x] * hv[x];
            pa->grad[i * n + m] += acc;
          }
      }
    }
    if (wants(ph)) {  // dH[b,m,x] = sum_i A[i,m] G[b,i,x]
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t base = b * n * inner;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t m = 0; m < n; ++m) {
            const double w = pa->values[i * n + m];
            if (w == 0.0) continue;
            const double* g = self.grad.data() + base + i * inner;
            double* dst = ph->grad.data() + base + m * inner;
            for (std::size_t x = 0; x < inner; ++x) dst[x] += w * g[x];
          }
      }
    }
  });
}

Tensor conv1d_dilated(const Tensor& h, const Tensor& w, const Tensor& bias,
                      std::size_t dilation) {
  require_defined(h, "conv1d_dilated");
  require_defined(w, "conv1d_dilated");
  if (dilation < 1) throw ContractError("conv1d_dilated: dilation must be >= 1");
  if (h.rank() < 2) throw DimensionError("conv1d_dilated: input rank must be >= 2");
  if (w.rank() != 3) throw DimensionError("conv1d_dilated: weight must be [C_out x C_in x m]");
  const std::size_t c_in = h.dim(-2), q = h.dim(-1);
  const std::size_t c_out = w.dim(0), m = w.dim(2);
  if (w.dim(1) != c_in) {
    throw DimensionError("conv1d_dilated: weight channels " + shape_str(w.shape()) +
                         " do not match input " + shape_str(h.shape()));
  }
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != c_out)) {
    throw DimensionError("conv1d_dilated: bias must be [C_out]");
  }
  const std::size_t span = dilation * (m - 1);
  if (q < span + 1) {
    throw DimensionError("conv1d_dilated: time axis " + std::to_string(q) +
                         " too short for kernel width " + std::to_string(m) +
                         " at dilation " + std::to_string(dilation));
  }
  const std::size_t q_out = q - span;
  const std::size_t batch = leading_count(h.shape(), 2);

  Shape out_shape = h.shape();
  out_shape[out_shape.size() - 2] = c_out;
  out_shape[out_shape.size() - 1] = q_out;
  std::vector<double> out(batch * c_out * q_out, 0.0);
  const auto& hv = h.values();
  const auto& wv = w.values();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* in = hv.data() + b * c_in * q;
    double* o = out.data() + b * c_out * q_out;
    for (std::size_t oc = 0; oc < c_out; ++oc) {
      for (std::size_t t = 0; t < q_out; ++t) {
        double acc = has_bias ? bias.values()[oc] : 0.0;
        for (std::size_t ic = 0; ic < c_in; ++ic) {
          const double* wrow = wv.data() + (oc * c_in + ic) * m;
          const double* irow = in + ic * q + t;
          for (std::size_t j = 0; j < m; ++j) acc += wrow[j] * irow[j * dilation];
        }
        o[oc * q_out + t] = acc;
      }
    }
  }
  std::vector<Tensor> parents = {h, w};
  if (has_bias) parents.push_back(bias);
  return make_op(std::move(out_shape), std::move(out), std::move(parents),
                 [batch, c_in, c_out, q, q_out, m, dilation, has_bias](TensorNode& self) {
                   auto& ph = self.parents[0];
                   auto& pw = self.parents[1];
                   for (std::size_t b = 0; b < batch; ++b) {
                     const double* g = self.grad.data() + b * c_out * q_out;
                     const double* in = ph->values.data() + b * c_in * q;
                     for (std::size_t oc = 0; oc < c_out; ++oc) {
                       for (std::size_t t = 0; t < q_out; ++t) {
                         const double gv = g[oc * q_out + t];
                         if (gv == 0.0) continue;
                         for (std::size_t ic = 0; ic < c_in; ++ic) {
                           const std::size_t wbase = (oc * c_in + ic) * m;
                           for (std::size_t j = 0; j < m; ++j) {
                             const std::size_t it = t + j * dilation;
                             if (wants(pw)) pw->grad[wbase + j] += gv * in[ic * q + it];
                             if (wants(ph)) ph->grad[b * c_in * q + ic * q + it] += gv * pw->values[wbase + j];
                           }
                         }
                       }
                     }
                   }
                   if (has_bias && wants(self.parents[2])) {
                     auto& pb = self.parents[2];
                     for (std::size_t b = 0; b < batch; ++b) {
                       const double* g = self.grad.data() + b * c_out * q_out;
                       for (std::size_t oc = 0; oc < c_out; ++oc)
                         for (std::size_t t = 0; t < q_out; ++t) pb->grad[oc] += g[oc * q_out + t];
                     }
                   }
                 });
}

Tensor feature_linear(const Tensor& h, const Tensor& w, const Tensor& bias) {
  require_defined(h, "feature_linear");
  require_defined(w, "feature_linear");
  if (h.rank() < 2) throw DimensionError("feature_linear: input rank must be >= 2");
  if (w.rank() != 2) throw DimensionError("feature_linear: weight must be rank-2");
  const std::size_t c = h.dim(-2), q = h.dim(-1);
  if (w.dim(0) != c) {
    throw DimensionError("feature_linear: weight " + shape_str(w.shape()) +
                         " does not match channels of " + shape_str(h.shape()));
  }
  const std::size_t e = w.dim(1);
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != e)) {
    throw DimensionError("feature_linear: bias must be [" + std::to_string(e) + "]");
  }
  const std::size_t batch = leading_count(h.shape(), 2);
  Shape out_shape = h.shape();
  out_shape[out_shape.size() - 2] = e;
  std::vector<double> out(batch * e * q, 0.0);
  const auto& hv = h.values();
  const auto& wv = w.values();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* in = hv.data() + b * c * q;
    double* o = out.data() + b * e * q;
    for (std::size_t ic = 0; ic < c; ++ic) {
      const double* irow = in + ic * q;
      for (std::size_t oc = 0; oc < e; ++oc) {
        const double wht = wv[ic * e + oc];
        if (wht == 0.0) continue;
        double* orow = o + oc * q;
        for (std::size_t t = 0; t < q; ++t) orow[t] += wht * irow[t];
      }
    }
    if (has_bias) {
      for (std::size_t oc = 0; oc < e; ++oc) {
        const double bv = bias.values()[oc];
        double* orow = o + oc * q;
        for (std::size_t t = 0; t < q; ++t) orow[t] += bv;
      }
    }
  }
  std::vector<Tensor> parents = {h, w};
  if (has_bias) parents.push_back(bias);
  return make_op(std::move(out_shape), std::move(out), std::move(parents),
                 [batch, c, e, q, has_bias](TensorNode& self) {
                   auto& ph = self.parents[0];
                   auto& pw = self.parents[1];
                   for (std::size_t b = 0; b < batch; ++b) {
                     const double* g = self.grad.data() + b * e * q;
                     const double* in = ph->values.data() + b * c * q;
                     for (std::size_t ic = 0; ic < c; ++ic)
                       for (std::size_t oc = 0; oc < e; ++oc) {
                         const double wht = pw->values[ic * e + oc];
                         const double* grow = g + oc * q;
                         if (wants(ph) && wht != 0.0) {
                           double* drow = ph->grad.data() + b * c * q + ic * q;
                           for (std::size_t t = 0; t < q; ++t) drow[t] += wht * grow[t];
                         }
                         if (wants(pw)) {
                           const double* irow = in + ic * q;
                           double acc = 0.0;
                           for (std::size_t t = 0; t < q; ++t) acc += irow[t] * grow[t];
                           pw->grad[ic * e + oc] += acc;
                         }
                       }
                   }
                   if (has_bias && wants(self.parents[2])) {
                     auto& pb = self.parents[2];
                     for (std::size_t b = 0; b < batch; ++b) {
                       const double* g = self.grad.data() + b * e * q;
                       for (std::size_t oc = 0; oc < e; ++oc)
                         for (std::size_t t = 0; t < q; ++t) pb->grad[oc] += g[oc * q + t];
                     }
                   }
                 });
}

Tensor truncate_last(const Tensor& h, std::size_t keep) {
  require_defined(h, "truncate_last");
  if (h.rank() < 1) throw DimensionError("truncate_last: scalar input");
  const std::size_t q = h.dim(-1);
  if (keep > q) {
    throw DimensionError("truncate_last: keep " + std::to_string(keep) +
                         " exceeds axis length " + std::to_string(q));
  }
  const std::size_t rows = leading_count(h.shape(), 1);
  const std::size_t off = q - keep;
  Shape out_shape = h.shape();
  out_shape.back() = keep;
  std::vector<double> out(rows * keep);
  const auto& hv = h.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < keep; ++t) out[r * keep + t] = hv[r * q + off + t];
  return make_op(std::move(out_shape), std::move(out), {h}, [rows, q, keep, off](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t t = 0; t < keep; ++t) p->grad[r * q + off + t] += self.grad[r * keep + t];
  });
}

Tensor pad_left_zero(const Tensor& h, std::size_t padded_len) {
  require_defined(h, "pad_left_zero");
  if (h.rank() < 1) throw DimensionError("pad_left_zero: scalar input");
  const std::size_t q = h.dim(-1);
  if (q > padded_len) {
    throw DimensionError("pad_left_zero: axis length " + std::to_string(q) +
                         " exceeds target " + std::to_string(padded_len));
  }
  const std::size_t rows = leading_count(h.shape(), 1);
  const std::size_t off = padded_len - q;
  Shape out_shape = h.shape();
  out_shape.back() = padded_len;
  std::vector<double> out(rows * padded_len, 0.0);
  const auto& hv = h.values();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < q; ++t) out[r * padded_len + off + t] = hv[r * q + t];
  return make_op(std::move(out_shape), std::move(out), {h},
                 [rows, q, padded_len, off](TensorNode& self) {
                   auto& p = self.parents[0];
                   if (!wants(p)) return;
                   for (std::size_t r = 0; r < rows; ++r)
                     for (std::size_t t = 0; t < q; ++t)
                       p->grad[r * q + t] += self.grad[r * padded_len + off + t];
                 });
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_channels: no inputs");
  for (const Tensor& p : parts) require_defined(p, "concat_channels");
  const Tensor& first = parts.front();
  if (first.rank() < 2) throw DimensionError("concat_channels: rank must be >= 2");
  const std::size_t q = first.dim(-1);
  std::size_t total_c = 0;
  std::vector<std::size_t> channels;
  for (const Tensor& p : parts) {
    Shape s = p.shape();
    Shape f = first.shape();
    s[s.size() - 2] = 0;
    f[f.size() - 2] = 0;
    if (s != f) {
      throw DimensionError("concat_channels: mismatched shapes " + shape_str(p.shape()) +
                           " vs " + shape_str(first.shape()));
    }
    channels.push_back(p.dim(-2));
    total_c += channels.back();
  }
  const std::size_t batch = leading_count(first.shape(), 2);
  Shape out_shape = first.shape();
  out_shape[out_shape.size() - 2] = total_c;
  std::vector<double> out(batch * total_c * q);
  std::size_t c_off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& pv = parts[k].values();
    const std::size_t ck = channels[k];
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(pv.begin() + b * ck * q, pv.begin() + (b + 1) * ck * q,
                out.begin() + (b * total_c + c_off) * q);
    c_off += ck;
  }
  return make_op(std::move(out_shape), std::move(out), parts,
                 [batch, total_c, q, channels](TensorNode& self) {
                   std::size_t c_off = 0;
                   for (std::size_t k = 0; k < self.parents.size(); ++k) {
                     auto& p = self.parents[k];
                     const std::size_t ck = channels[k];
                     if (wants(p)) {
                       for (std::size_t b = 0; b < batch; ++b) {
                         const double* g = self.grad.data() + (b * total_c + c_off) * q;
                         double* d = p->grad.data() + b * ck * q;
                         for (std::size_t x = 0; x < ck * q; ++x) d[x] += g[x];
                       }
                     }
                     c_off += ck;
                   }
                 });
}

Tensor normalize_rows_selfloop(const Tensor& adj) {
  require_defined(adj, "normalize_rows_selfloop");
  if (adj.rank() != 2 || adj.dim(0) != adj.dim(1)) {
    throw DimensionError("normalize_rows_selfloop: expected square matrix, got " +
                         shape_str(adj.shape()));
  }
  const std::size_t n = adj.dim(0);
  const auto& av = adj.values();
  auto rowsum = std::make_shared<std::vector<double>>(n, 1.0);  // + self-loop
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) (*rowsum)[i] += av[i * n + j];
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = (av[i * n + j] + (i == j ? 1.0 : 0.0)) / (*rowsum)[i];
  return make_op({n, n}, std::move(out), {adj}, [n, rowsum](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;  // sum_j g[i,j] out[i,j]
      for (std::size_t j = 0; j < n; ++j) dot += self.grad[i * n + j] * self.values[i * n + j];
      const double s = (*rowsum)[i];
      for (std::size_t k = 0; k < n; ++k) p->grad[i * n + k] += (self.grad[i * n + k] - dot) / s;
    }
  });
}

// ------------------------------------------------------------- reductions ---

Tensor reshape(const Tensor& a, Shape shape) {
  require_defined(a, "reshape");
  if (shape_numel(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out = a.values();
  return make_op(std::move(shape), std::move(out), {a}, [](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
  });
}

Tensor sum_all(const Tensor& a) {
  require_defined(a, "sum_all");
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  return make_op({1}, {acc}, {a}, [](TensorNode& self) {
    auto& p = self.parents[0];
    if (!wants(p)) return;
    for (double& g : p->grad) g += self.grad[0];
  });
}

Tensor mean_abs_error(const Tensor& pred, const Tensor& target) {
  require_defined(pred, "mean_abs_error");
  require_defined(target, "mean_abs_error");
  require_same_shape(pred, target, "mean_abs_error");
  const std::size_t n = pred.size();
  const auto& pv = pred.values();
  const auto& tv = target.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(pv[i] - tv[i]);
  acc /= static_cast<double>(n);
  return make_op({1}, {acc}, {pred, target}, [n](TensorNode& self) {
    auto& pp = self.parents[0];
    auto& pt = self.parents[1];
    const double g = self.grad[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = pp->values[i] - pt->values[i];
      const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      if (wants(pp)) pp->grad[i] += g * s;
      if (wants(pt)) pt->grad[i] -= g * s;
    }
  });
}

}  // namespace odecast
