#pragma once

#include <random>
#include <vector>

#include "odecast/ode.hpp"
#include "odecast/tensor.hpp"

// Dynamic graph structure learning, adjacency normalization, and the
// continuous graph propagation (CGP) process with its attentive readout.
// The heat-kernel path is a non-differentiable analytic oracle used by the
// verification harness; it never participates in training.

namespace odecast {

struct GraphLearnerParams {
  Tensor e1, e2;  // [N x d] node embeddings
  Tensor g1, g2;  // [d x d] transforms
  double beta = 3.0;

  static GraphLearnerParams init(std::size_t nodes, std::size_t embed_dim, double beta,
                                 std::mt19937_64& rng);
  std::size_t nodes() const { return e1.dim(0); }
  std::vector<Tensor> parameters() const { return {e1, e2, g1, g2}; }
};

struct Adjacency {
  Tensor raw;         // learned A, zero diagonal, uni-directional
  Tensor normalized;  // row-stochastic A_hat
  std::size_t topk = 0;
};

// A = relu(tanh(beta (M1 M2^T - M2 M1^T))) with M_k = tanh(beta E_k G_k).
// Entries land in [0,1) with an exactly zero diagonal and A_ij * A_ji = 0.
Tensor learn_adjacency(const GraphLearnerParams& params);

// Keep the k largest entries per row (ties to the lower column index);
// gradient flows only through kept entries.
Tensor sparsify_topk(const Tensor& a, std::size_t k);

// Row normalization with self-loops: A_hat = (A + I) / rowsum(A + I).
Tensor normalize_adjacency(const Tensor& a);

// dH/dt = (A_hat - I) H = -L H.
Tensor cgp_field(const Tensor& h, const Tensor& a_hat);

// Integrate the CGP field and blend every grid state through its own
// feature map: out = sum_i H(t_i) Phi_i. Requires phi.size() == K+1.
Tensor cgp_solve_attentive(const Tensor& h0, const Tensor& a_hat, const SolverSpec& spec,
                           const std::vector<Tensor>& phi);

// Phi maps scaled so the initial attentive output equals the trajectory mean.
std::vector<Tensor> init_attentive_maps(std::size_t hidden, int cgp_steps);

// ---- analytic oracle path (test/verification only) ----

// exp(-t L) H0 via eigendecomposition of the symmetric L = I - A_hat.
Tensor heat_kernel_oracle(const Tensor& a_hat_sym, double t, const Tensor& h0);

// D^{-1/2} (A + I) D^{-1/2}; symmetric whenever A is.
Tensor symmetric_normalized_adjacency(const Tensor& a);

double spectral_norm_symmetric(const Tensor& m);
double frobenius_norm(const Tensor& t);

// Worst-case Euler error after K steps: (T |L| |H0| / 2K) (exp(T |L|) - 1).
double euler_error_bound(double terminal_time, double laplacian_norm, double h0_norm,
                         long long steps);

}  // namespace odecast
