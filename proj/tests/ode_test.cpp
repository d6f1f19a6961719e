#include "odecast/ode.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace odecast;

namespace {

const VectorField kDecay = [](const Tensor& h, int) { return scale(h, -1.0); };
const VectorField kZero = [](const Tensor& h, int) { return scale(h, 0.0); };

double max_abs_error(const Tensor& got, const Tensor& want) {
  double m = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    m = std::max(m, std::abs(got.values()[i] - want.values()[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("solver spec validation") {
  CHECK(SolverSpec::euler(1.0, 0.25).steps() == 4);
  CHECK(SolverSpec::rk4(2.0, 0.5).steps() == 4);
  CHECK(SolverSpec::euler(1.0, 1.0).steps() == 1);
  CHECK_THROWS_AS((void)SolverSpec::euler(1.0, 0.3).steps(), ContractError);
  CHECK_THROWS_AS((void)SolverSpec::euler(1.0, 2.0).steps(), ContractError);
  CHECK_THROWS_AS((void)SolverSpec::euler(-1.0, 0.5).steps(), ContractError);
  CHECK_THROWS_AS((void)SolverSpec::euler(1.0, 0.0).steps(), ContractError);
}

TEST_CASE("constant solution for a zero field") {
  std::mt19937_64 rng(1);
  Tensor h0 = Tensor::uniform({3, 2}, -1.0, 1.0, rng);
  for (auto spec : {SolverSpec::euler(2.0, 0.5), SolverSpec::rk4(1.0, 0.25)}) {
    Tensor h = integrate(kZero, h0, spec);
    CHECK(h.values() == h0.values());
  }
}

TEST_CASE("Euler closed-form recurrence for dH/dt = -H") {
  Tensor h0 = Tensor::from_values({2}, {1.0, -3.0});
  Tensor h = integrate(kDecay, h0, SolverSpec::euler(1.0, 0.5));
  CHECK(h.values()[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(h.values()[1] == doctest::Approx(-0.75).epsilon(1e-12));

  // K=1 degenerates to a single explicit step H0 + T f(H0)
  Tensor one = integrate(kDecay, h0, SolverSpec::euler(0.7, 0.7));
  CHECK(one.values()[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("RK4 approximates the exponential") {
  Tensor h0 = Tensor::from_values({1}, {0.5});
  Tensor h = integrate(kDecay, h0, SolverSpec::rk4(1.0, 0.25));
  CHECK(std::abs(h.values()[0] - 0.5 * std::exp(-1.0)) < 1e-5);
  // exact oracle: the RK4 stability polynomial applied K times
  const double z = -0.25;
  const double r = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
  CHECK(h.values()[0] == doctest::Approx(0.5 * std::pow(r, 4)).epsilon(1e-12));
}

TEST_CASE("trajectory contract") {
  Tensor h0 = Tensor::from_values({2}, {4.0, 8.0});
  SUBCASE("zero field repeats the initial state") {
    auto traj = integrate_trajectory(kZero, h0, SolverSpec::euler(3.0, 1.0));
    REQUIRE(traj.size() == 4);
    for (const Tensor& t : traj) CHECK(t.values() == h0.values());
  }
  SUBCASE("per-step Euler recurrence") {
    auto traj = integrate_trajectory(kDecay, h0, SolverSpec::euler(1.0, 0.5));
    REQUIRE(traj.size() == 3);
    CHECK(traj[0].values() == std::vector<double>{4.0, 8.0});
    CHECK(traj[1].values()[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(traj[2].values()[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("last element is bitwise the integrate result") {
    for (auto spec : {SolverSpec::euler(1.0, 0.25), SolverSpec::rk4(1.0, 0.5)}) {
      auto traj = integrate_trajectory(kDecay, h0, spec);
      Tensor direct = integrate(kDecay, h0, spec);
      CHECK(traj.back().values() == direct.values());
    }
  }
}

TEST_CASE("order of convergence for dH/dt = -H") {
  Tensor h0 = Tensor::from_values({1}, {1.0});
  Tensor exact = Tensor::from_values({1}, {std::exp(-1.0)});
  std::vector<double> euler_err, rk4_err;
  for (double dt : {0.25, 0.125, 0.0625}) {
    euler_err.push_back(max_abs_error(integrate(kDecay, h0, SolverSpec::euler(1.0, dt)), exact));
    rk4_err.push_back(max_abs_error(integrate(kDecay, h0, SolverSpec::rk4(1.0, dt)), exact));
  }
  for (std::size_t i = 0; i + 1 < euler_err.size(); ++i) {
    const double ratio = euler_err[i] / euler_err[i + 1];
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
  }
  for (std::size_t i = 0; i + 1 < rk4_err.size(); ++i) {
    const double ratio = rk4_err[i] / rk4_err[i + 1];
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
  }
}

TEST_CASE("gradients flow through the unrolled solver") {
  Tensor h0 = Tensor::from_values({2}, {1.0, -0.5}, true);
  Tensor probe = Tensor::from_values({2}, {0.7, -1.1});
  auto eval = [&]() {
    return sum_all(mul(integrate(kDecay, h0, SolverSpec::euler(1.0, 0.25)), probe));
  };
  Tensor loss = eval();
  h0.zero_grad();
  loss.backward();
  // linear field: d(out_i)/d(h0_i) = (1 - dt)^K
  const double factor = std::pow(0.75, 4);
  CHECK(h0.grad()[0] == doctest::Approx(0.7 * factor).epsilon(1e-9));
  CHECK(h0.grad()[1] == doctest::Approx(-1.1 * factor).epsilon(1e-9));

  const double h = 1e-5;
  for (std::size_t j = 0; j < 2; ++j) {
    const double orig = h0.values()[j];
    h0.values()[j] = orig + h;
    const double up = eval().item();
    h0.values()[j] = orig - h;
    const double down = eval().item();
    h0.values()[j] = orig;
    const double fd = (up - down) / (2.0 * h);
    CHECK(std::abs(h0.grad()[j] - fd) / std::abs(fd) < 1e-4);
  }
}

TEST_CASE("field that changes shape is rejected") {
  Tensor h0 = Tensor::from_values({2}, {1.0, 2.0});
  VectorField bad = [](const Tensor& h, int) { return truncate_last(h, 1); };
  CHECK_THROWS_AS((void)integrate(bad, h0, SolverSpec::euler(1.0, 1.0)), DimensionError);
}

TEST_CASE("field sees the step index") {
  Tensor h0 = Tensor::from_values({1}, {0.0});
  VectorField staircase = [](const Tensor& h, int step) {
    return add(scale(h, 0.0), Tensor::full({1}, static_cast<double>(step)));
  };
  // dt = 1: increments 0, 1, 2 -> 3
  Tensor h = integrate(staircase, h0, SolverSpec::euler(3.0, 1.0));
  CHECK(h.values()[0] == doctest::Approx(3.0));
}
