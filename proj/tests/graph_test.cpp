#include "odecast/graph.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace odecast;

namespace {

// Brute-force K-hop propagation on raw values.
std::vector<double> khop(const Tensor& a_hat, const Tensor& h0, int hops) {
  const std::size_t n = a_hat.dim(0);
  const std::size_t inner = h0.size() / n;
  std::vector<double> h = h0.values(), next(h.size());
  for (int k = 0; k < hops; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t x = 0; x < inner; ++x)
          next[i * inner + x] += a_hat.values()[i * n + m] * h[m * inner + x];
    h = next;
  }
  return h;
}

}  // namespace

TEST_CASE("learn_adjacency degenerate cases") {
  std::mt19937_64 rng(1);
  SUBCASE("identical embeddings and transforms give an empty graph") {
    GraphLearnerParams p;
    p.e1 = Tensor::uniform({3, 2}, -1.0, 1.0, rng, true);
    p.e2 = p.e1;
    p.g1 = Tensor::uniform({2, 2}, -1.0, 1.0, rng, true);
    p.g2 = p.g1;
    p.beta = 2.0;
    Tensor a = learn_adjacency(p);
    for (double v : a.values()) CHECK(v == 0.0);
  }
  SUBCASE("beta = 0 gives an empty graph") {
    GraphLearnerParams p = GraphLearnerParams::init(3, 2, 1.0, rng);
    p.beta = 0.0;
    Tensor a = learn_adjacency(p);
    for (double v : a.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("learn_adjacency hand evaluation, N=2, d=1") {
  GraphLearnerParams p;
  p.e1 = Tensor::from_values({2, 1}, {1.0, 0.0}, true);
  p.e2 = Tensor::from_values({2, 1}, {0.0, 1.0}, true);
  p.g1 = Tensor::from_values({1, 1}, {1.0}, true);
  p.g2 = Tensor::from_values({1, 1}, {1.0}, true);
  p.beta = 1.0;
  Tensor a = learn_adjacency(p);
  const double t1 = std::tanh(1.0);
  const double expected = std::tanh(t1 * t1);  // ~0.5227
  CHECK(a.at({0, 0}) == 0.0);
  CHECK(a.at({0, 1}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(a.at({1, 0}) == 0.0);
  CHECK(a.at({1, 1}) == 0.0);
}

TEST_CASE("learned graphs are uni-directional with zero diagonal") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> nd(2, 10), dd(1, 6);
    const std::size_t n = nd(rng), d = dd(rng);
    Tensor a = learn_adjacency(GraphLearnerParams::init(n, d, 3.0, rng));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = a.values()[i * n + j];
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        if (i == j) CHECK(v == 0.0);
        CHECK(v * a.values()[j * n + i] == 0.0);
      }
  }
}

TEST_CASE("sparsify_topk keeps the k largest per row") {
  Tensor a = Tensor::from_values({3, 3}, {0.3, 0.1, 0.2, 0.0, 0.5, 0.4, 0.9, 0.8, 0.7}, true);
  SUBCASE("k = N leaves the matrix unchanged") {
    CHECK(sparsify_topk(a, 3).values() == a.values());
  }
  SUBCASE("k = 1 keeps the argmax") {
    Tensor s = sparsify_topk(a, 1);
    CHECK(s.values() == std::vector<double>{0.3, 0, 0, 0, 0.5, 0, 0.9, 0, 0});
  }
  SUBCASE("k = 2") {
    Tensor s = sparsify_topk(a, 2);
    CHECK(s.values() == std::vector<double>{0.3, 0, 0.2, 0, 0.5, 0.4, 0.9, 0.8, 0});
  }
  SUBCASE("ties break toward the lower column index") {
    Tensor t = Tensor::from_values({2, 2}, {0.5, 0.5, 0.1, 0.1});
    Tensor s = sparsify_topk(t, 1);
    CHECK(s.values() == std::vector<double>{0.5, 0, 0.1, 0});
  }
  SUBCASE("k > N is a contract error") {
    CHECK_THROWS_AS((void)sparsify_topk(a, 4), ContractError);
  }
  SUBCASE("gradient flows only through kept entries") {
    Tensor s = sparsify_topk(a, 1);
    sum_all(s).backward();
    CHECK(a.grad() == std::vector<double>{1, 0, 0, 0, 1, 0, 1, 0, 0});
  }
}

TEST_CASE("normalize_adjacency") {
  SUBCASE("empty graph becomes the identity") {
    Tensor a = Tensor::zeros({2, 2});
    Tensor n = normalize_adjacency(a);
    CHECK(n.values() == std::vector<double>{1, 0, 0, 1});
  }
  SUBCASE("equal row mass") {
    Tensor a = Tensor::from_values({2, 2}, {0, 1, 1, 0});
    Tensor n = normalize_adjacency(a);
    for (double v : n.values()) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("hand row normalization") {
    Tensor a = Tensor::from_values({2, 2}, {0, 2, 0, 0});
    Tensor n = normalize_adjacency(a);
    CHECK(n.at({0, 0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(n.at({0, 1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(n.at({1, 0}) == 0.0);
    CHECK(n.at({1, 1}) == 1.0);
  }
  SUBCASE("rows sum to one for random learned graphs") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 2 + rep % 6;
      Tensor a = learn_adjacency(GraphLearnerParams::init(n, 3, 3.0, rng));
      Tensor norm = normalize_adjacency(a);
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += norm.values()[i * n + j];
        CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("cgp_field") {
  SUBCASE("identity adjacency gives a zero field") {
    Tensor h = Tensor::from_values({2, 1, 1}, {3.0, -2.0});
    Tensor f = cgp_field(h, Tensor::identity(2));
    for (double v : f.values()) CHECK(v == 0.0);
  }
  SUBCASE("consensus is a fixed point of row-stochastic propagation") {
    std::mt19937_64 rng(6);
    Tensor a = normalize_adjacency(Tensor::uniform({3, 3}, 0.0, 1.0, rng));
    Tensor h = Tensor::from_values({3, 1, 2}, {1.5, -0.5, 1.5, -0.5, 1.5, -0.5});
    Tensor f = cgp_field(h, a);
    for (double v : f.values()) {
      CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
  SUBCASE("hand evaluation") {
    Tensor a = Tensor::from_values({2, 2}, {0.5, 0.5, 0.5, 0.5});
    Tensor h = Tensor::from_values({2, 1, 1}, {1.0, 0.0});
    Tensor f = cgp_field(h, a);
    CHECK(f.at({0, 0, 0}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(f.at({1, 0, 0}) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("cgp_solve_attentive") {
  std::mt19937_64 rng(7);
  Tensor a_hat = normalize_adjacency(Tensor::uniform({3, 3}, 0.0, 1.0, rng));
  Tensor h0 = Tensor::uniform({3, 2, 2}, -1.0, 1.0, rng);
  const std::size_t d = 2;

  SUBCASE("only the initial state kept") {
    SolverSpec spec = SolverSpec::euler(1.0, 0.5);
    std::vector<Tensor> phi{Tensor::identity(d), Tensor::zeros({d, d}), Tensor::zeros({d, d})};
    Tensor out = cgp_solve_attentive(h0, a_hat, spec, phi);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.values()[i] == doctest::Approx(h0.values()[i]).epsilon(1e-12));
    }
  }
  SUBCASE("terminal-only readout at unit step reproduces K-hop propagation") {
    for (int k : {1, 2, 4}) {
      SolverSpec spec = SolverSpec::euler(static_cast<double>(k), 1.0);
      std::vector<Tensor> phi(static_cast<std::size_t>(k) + 1, Tensor::zeros({d, d}));
      phi.back() = Tensor::identity(d);
      Tensor out = cgp_solve_attentive(h0, a_hat, spec, phi);
      std::vector<double> want = khop(a_hat, h0, k);
      for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(std::abs(out.values()[i] - want[i]) < 1e-9);
      }
    }
  }
  SUBCASE("identity adjacency with identity maps sums the constant trajectory") {
    SolverSpec spec = SolverSpec::euler(2.0, 1.0);
    std::vector<Tensor> phi(3, Tensor::identity(d));
    Tensor out = cgp_solve_attentive(h0, Tensor::identity(3), spec, phi);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.values()[i] == doctest::Approx(3.0 * h0.values()[i]).epsilon(1e-12));
    }
  }
  SUBCASE("wrong number of maps is a contract error") {
    SolverSpec spec = SolverSpec::euler(1.0, 0.5);
    std::vector<Tensor> phi{Tensor::identity(d), Tensor::identity(d)};
    CHECK_THROWS_AS((void)cgp_solve_attentive(h0, a_hat, spec, phi), ContractError);
  }
  SUBCASE("initial maps average the trajectory") {
    SolverSpec spec = SolverSpec::euler(1.0, 0.5);
    Tensor out = cgp_solve_attentive(h0, a_hat, spec, init_attentive_maps(d, 2));
    VectorField field = [&](const Tensor& s, int) { return cgp_field(s, a_hat); };
    auto traj = integrate_trajectory(field, h0, spec);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double mean =
          (traj[0].values()[i] + traj[1].values()[i] + traj[2].values()[i]) / 3.0;
      CHECK(out.values()[i] == doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("heat kernel oracle") {
  SUBCASE("t = 0 is the identity") {
    std::mt19937_64 rng(8);
    Tensor a = symmetric_normalized_adjacency(Tensor::uniform({3, 3}, 0.0, 0.0, rng));
    Tensor h0 = Tensor::uniform({3, 1, 2}, -1.0, 1.0, rng);
    Tensor out = heat_kernel_oracle(a, 0.0, h0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.values()[i] == doctest::Approx(h0.values()[i]).epsilon(1e-12));
    }
  }
  SUBCASE("identity adjacency has a zero generator") {
    std::mt19937_64 rng(9);
    Tensor h0 = Tensor::uniform({2, 1, 1}, -1.0, 1.0, rng);
    Tensor out = heat_kernel_oracle(Tensor::identity(2), 5.0, h0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.values()[i] == doctest::Approx(h0.values()[i]).epsilon(1e-12));
    }
  }
  SUBCASE("two-node hand evaluation, eigenvalues {0, 1}") {
    Tensor a = Tensor::from_values({2, 2}, {0.5, 0.5, 0.5, 0.5});
    Tensor h0 = Tensor::from_values({2, 1, 1}, {1.0, 0.0});
    Tensor out = heat_kernel_oracle(a, 1.0, h0);
    const double e1 = std::exp(-1.0);
    CHECK(out.at({0, 0, 0}) == doctest::Approx((1.0 + e1) / 2.0).epsilon(1e-12));
    CHECK(out.at({1, 0, 0}) == doctest::Approx((1.0 - e1) / 2.0).epsilon(1e-12));
    CHECK(out.at({0, 0, 0}) == doctest::Approx(0.6839).epsilon(1e-4));
    CHECK(out.at({1, 0, 0}) == doctest::Approx(0.3161).epsilon(1e-4));
  }
  SUBCASE("asymmetric generator is rejected") {
    Tensor a = Tensor::from_values({2, 2}, {0.2, 0.8, 0.3, 0.7});
    Tensor h0 = Tensor::from_values({2, 1, 1}, {1.0, 0.0});
    CHECK_THROWS_AS((void)heat_kernel_oracle(a, 1.0, h0), ContractError);
  }
}

TEST_CASE("euler error bound arithmetic") {
  CHECK(euler_error_bound(1.0, 1.0, 1.0, 10) ==
        doctest::Approx((std::exp(1.0) - 1.0) / 20.0).epsilon(1e-12));
  CHECK(euler_error_bound(1.0, 1.0, 1.0, 10) == doctest::Approx(0.08591).epsilon(1e-4));
  // doubling K halves the bound exactly
  const double b1 = euler_error_bound(0.7, 1.3, 2.0, 8);
  const double b2 = euler_error_bound(0.7, 1.3, 2.0, 16);
  CHECK(b1 == doctest::Approx(2.0 * b2).epsilon(1e-15));
  CHECK(euler_error_bound(0.0, 1.0, 1.0, 4) == 0.0);
}

TEST_CASE("spectral and Frobenius norms") {
  Tensor lap = Tensor::from_values({2, 2}, {0.5, -0.5, -0.5, 0.5});
  CHECK(spectral_norm_symmetric(lap) == doctest::Approx(1.0).epsilon(1e-12));
  Tensor v = Tensor::from_values({2, 2}, {3.0, 0.0, 0.0, 4.0});
  CHECK(frobenius_norm(v) == doctest::Approx(5.0).epsilon(1e-12));
}
