#include "odecast/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace odecast {

GraphLearnerParams GraphLearnerParams::init(std::size_t nodes, std::size_t embed_dim,
                                            double beta, std::mt19937_64& rng) {
  if (nodes < 2 || embed_dim < 1) {
    throw ContractError("GraphLearnerParams: need N >= 2 and d >= 1");
  }
  if (!(beta > 0.0)) throw ContractError("GraphLearnerParams: beta must be positive");
  GraphLearnerParams p;
  p.beta = beta;
  p.e1 = Tensor::normal({nodes, embed_dim}, 1.0, rng, true);
  p.e2 = Tensor::normal({nodes, embed_dim}, 1.0, rng, true);
  const double bound = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  p.g1 = Tensor::uniform({embed_dim, embed_dim}, -bound, bound, rng, true);
  p.g2 = Tensor::uniform({embed_dim, embed_dim}, -bound, bound, rng, true);
  return p;
}

Tensor learn_adjacency(const GraphLearnerParams& params) {
  Tensor m1 = tanh(scale(matmul(params.e1, params.g1), params.beta));
  Tensor m2 = tanh(scale(matmul(params.e2, params.g2), params.beta));
  Tensor skew = sub(matmul(m1, transpose(m2)), matmul(m2, transpose(m1)));
  Tensor a = relu(tanh(scale(skew, params.beta)));
  // entries live in [0,1): undo the float64 saturation of tanh at huge inputs
  const double below_one = std::nextafter(1.0, 0.0);
  for (double& v : a.values()) {
    if (v >= 1.0) v = below_one;
  }
  return a;
}

Tensor sparsify_topk(const Tensor& a, std::size_t k) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
    throw DimensionError("sparsify_topk: expected square matrix, got " + shape_str(a.shape()));
  }
  const std::size_t n = a.dim(0);
  if (k == 0 || k > n) {
    throw ContractError("sparsify_topk: k = " + std::to_string(k) + " out of range for N = " +
                        std::to_string(n));
  }
  if (k == n) return a;
  const auto& av = a.values();
  std::vector<double> mask(n * n, 0.0);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return av[i * n + x] > av[i * n + y];
    });
    for (std::size_t j = 0; j < k; ++j) mask[i * n + idx[j]] = 1.0;
  }
  return mul(a, Tensor::from_values({n, n}, std::move(mask)));
}

Tensor normalize_adjacency(const Tensor& a) { return normalize_rows_selfloop(a); }

Tensor cgp_field(const Tensor& h, const Tensor& a_hat) {
  return sub(propagate_nodes(a_hat, h), h);
}

Tensor cgp_solve_attentive(const Tensor& h0, const Tensor& a_hat, const SolverSpec& spec,
                           const std::vector<Tensor>& phi) {
  const int k = spec.steps();
  if (phi.size() != static_cast<std::size_t>(k) + 1) {
    throw ContractError("cgp_solve_attentive: expected " + std::to_string(k + 1) +
                        " feature maps, got " + std::to_string(phi.size()));
  }
  VectorField field = [&a_hat](const Tensor& state, int) { return cgp_field(state, a_hat); };
  std::vector<Tensor> states = integrate_trajectory(field, h0, spec);
  Tensor out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    Tensor term = feature_linear(states[i], phi[i], Tensor());
    out = out.defined() ? add(out, term) : term;
  }
  return out;
}

std::vector<Tensor> init_attentive_maps(std::size_t hidden, int cgp_steps) {
  std::vector<Tensor> phi;
  const double w = 1.0 / static_cast<double>(cgp_steps + 1);
  for (int i = 0; i <= cgp_steps; ++i) {
    Tensor m = Tensor::identity(hidden, true);
    for (double& v : m.values()) v *= w;
    phi.push_back(m);
  }
  return phi;
}

// ------------------------------------------------------------ oracle path ---

namespace {

Eigen::MatrixXd to_eigen(const Tensor& t) {
  const std::size_t n = t.dim(0), m = t.dim(1);
  Eigen::MatrixXd out(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out(i, j) = t.values()[i * m + j];
  return out;
}

}  // namespace

Tensor heat_kernel_oracle(const Tensor& a_hat_sym, double t, const Tensor& h0) {
  if (a_hat_sym.rank() != 2 || a_hat_sym.dim(0) != a_hat_sym.dim(1)) {
    throw DimensionError("heat_kernel_oracle: adjacency must be square");
  }
  if (t < 0.0) throw ContractError("heat_kernel_oracle: t must be nonnegative");
  const std::size_t n = a_hat_sym.dim(0);
  if (h0.rank() < 3 || h0.dim(-3) != n) {
    throw DimensionError("heat_kernel_oracle: state " + shape_str(h0.shape()) +
                         " does not match graph of " + std::to_string(n) + " nodes");
  }
  const auto& av = a_hat_sym.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(av[i * n + j] - av[j * n + i]) > 1e-12) {
        throw ContractError("heat_kernel_oracle: L = I - A_hat must be symmetric");
      }
    }

  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) - to_eigen(a_hat_sym);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  const Eigen::MatrixXd& u = eig.eigenvectors();
  Eigen::VectorXd decay = (-t * eig.eigenvalues().array()).exp();
  Eigen::MatrixXd kernel = u * decay.asDiagonal() * u.transpose();

  const std::size_t batch = h0.size() / (n * h0.dim(-2) * h0.dim(-1));
  const std::size_t inner = h0.dim(-2) * h0.dim(-1);
  std::vector<double> out(h0.size(), 0.0);
  const auto& hv = h0.values();
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * n * inner;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m) {
        const double w = kernel(i, m);
        for (std::size_t x = 0; x < inner; ++x) out[base + i * inner + x] += w * hv[base + m * inner + x];
      }
  }
  return Tensor::from_values(h0.shape(), std::move(out));
}

Tensor symmetric_normalized_adjacency(const Tensor& a) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
    throw DimensionError("symmetric_normalized_adjacency: expected square matrix");
  }
  const std::size_t n = a.dim(0);
  const auto& av = a.values();
  std::vector<double> deg(n, 1.0);  // self-loop
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += av[i * n + j];
  std::vector<double> out(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double tilde = av[i * n + j] + (i == j ? 1.0 : 0.0);
      out[i * n + j] = tilde / std::sqrt(deg[i] * deg[j]);
    }
  return Tensor::from_values({n, n}, std::move(out));
}

double spectral_norm_symmetric(const Tensor& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) {
    throw DimensionError("spectral_norm_symmetric: expected square matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(to_eigen(m));
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double frobenius_norm(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v * v;
  return std::sqrt(acc);
}

double euler_error_bound(double terminal_time, double laplacian_norm, double h0_norm,
                         long long steps) {
  if (steps <= 0) throw ContractError("euler_error_bound: steps must be positive");
  return terminal_time * laplacian_norm * h0_norm / (2.0 * static_cast<double>(steps)) *
         std::expm1(terminal_time * laplacian_norm);
}

}  // namespace odecast
