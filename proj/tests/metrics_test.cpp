#include "odecast/metrics.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "odecast/tensor.hpp"

using namespace odecast;

TEST_CASE("single-step hand values") {
  SUBCASE("perfect prediction") {
    std::vector<double> truth{1, 2, 3, 4};
    auto m = single_step_metrics(truth, truth, 2, 2);
    CHECK(m.rse == 0.0);
    CHECK(m.corr == doctest::Approx(1.0));
  }
  SUBCASE("predicting the mean gives RSE 1") {
    std::vector<double> truth{1, 2, 3, 5};  // mean 2.75, non-constant columns
    std::vector<double> pred(4, 2.75);
    auto m = single_step_metrics(pred, truth, 2, 2);
    CHECK(m.rse == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("offset ramp: CORR 1, RSE sqrt(0.03)/sqrt(2)") {
    std::vector<double> truth{1, 2, 3};
    std::vector<double> pred{1.1, 2.1, 3.1};
    auto m = single_step_metrics(pred, truth, 3, 1);
    CHECK(m.corr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.rse == doctest::Approx(std::sqrt(0.03) / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(m.rse == doctest::Approx(0.1225).epsilon(1e-3));
  }
  SUBCASE("zero-variance variables are skipped in CORR") {
    // column 1 of truth is constant; CORR comes from column 0 alone
    std::vector<double> truth{1, 5, 2, 5, 3, 5};
    std::vector<double> pred{1, 4, 2, 6, 3, 5};
    auto m = single_step_metrics(pred, truth, 3, 2);
    CHECK(m.corr == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("all variables zero-variance is an error") {
    std::vector<double> truth{5, 5, 5, 5};
    std::vector<double> pred{1, 2, 3, 4};
    CHECK_THROWS_AS((void)single_step_metrics(pred, truth, 2, 2), ContractError);
  }
}

TEST_CASE("multi-step hand values") {
  SUBCASE("perfect prediction") {
    std::vector<double> truth{2, 4};
    auto m = multi_step_metrics(truth, truth, 1, 2, 0.0);
    CHECK(m.mae == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.mape == 0.0);
  }
  SUBCASE("truth [2,4], pred [1,6]") {
    std::vector<double> truth{2, 4};
    std::vector<double> pred{1, 6};
    auto m = multi_step_metrics(pred, truth, 1, 2, 0.0);
    CHECK(m.mae == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(m.rmse == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
    CHECK(m.rmse == doctest::Approx(1.5811).epsilon(1e-4));
    CHECK(m.mape == doctest::Approx(50.0).epsilon(1e-12));
  }
  SUBCASE("threshold masking excludes zero-truth cells") {
    std::vector<double> truth{0, 4};
    std::vector<double> pred{1, 4};
    auto masked = multi_step_metrics(pred, truth, 1, 2, 0.0);
    CHECK(masked.used_cells == 1);
    CHECK(masked.mae == 0.0);
    CHECK(masked.mape == 0.0);
    // masking disabled: the zero-truth cell counts for MAE, is guarded in MAPE
    auto unmasked = multi_step_metrics(pred, truth, 1, 2, -1.0);
    CHECK(unmasked.used_cells == 2);
    CHECK(unmasked.mae == doctest::Approx(0.5));
    CHECK(unmasked.mape == doctest::Approx(0.0));
  }
  SUBCASE("everything masked is an error") {
    std::vector<double> truth{0, 0};
    std::vector<double> pred{1, 1};
    CHECK_THROWS_AS((void)multi_step_metrics(pred, truth, 1, 2, 0.0), ContractError);
  }
}

TEST_CASE("metric invariances") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  const std::size_t rows = 20, cols = 3;
  std::vector<double> truth(rows * cols), pred(rows * cols);
  for (auto& v : truth) v = dist(rng);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = truth[i] + 0.3 * dist(rng);

  SUBCASE("RSE is invariant to a common positive rescaling") {
    auto base = single_step_metrics(pred, truth, rows, cols);
    std::vector<double> p2 = pred, t2 = truth;
    for (auto& v : p2) v *= 7.5;
    for (auto& v : t2) v *= 7.5;
    auto scaled = single_step_metrics(p2, t2, rows, cols);
    CHECK(scaled.rse == doctest::Approx(base.rse).epsilon(1e-12));
  }
  SUBCASE("CORR is invariant to positive affine rescaling of predictions") {
    auto base = single_step_metrics(pred, truth, rows, cols);
    std::vector<double> p2 = pred;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) p2[r * cols + c] = 3.0 * pred[r * cols + c] + 5.0;
    auto scaled = single_step_metrics(p2, truth, rows, cols);
    CHECK(scaled.corr == doctest::Approx(base.corr).epsilon(1e-9));
  }
  SUBCASE("RMSE >= MAE always") {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> t(rows * cols), p(rows * cols);
      for (auto& v : t) v = dist(rng) + 3.0;  // keep cells unmasked
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = t[i] + dist(rng);
      auto m = multi_step_metrics(p, t, rows, cols, 0.0);
      CHECK(m.rmse >= m.mae - 1e-12);
    }
  }
}

TEST_CASE("metric report serialization") {
  MetricReport report;
  report.protocol = "multi_step";
  report.variant = "no_gsl";
  report.rows.push_back({3, {{"mae", 1.5}, {"mape", 50.0}, {"rmse", 1.6}}, 100});
  report.rows.push_back({6, {{"mae", 2.0}, {"mape", 60.0}, {"rmse", 2.2}}, 100});

  auto j = report.to_json();
  CHECK(j["protocol"] == "multi_step");
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][0]["horizon"] == 3);
  CHECK(j["rows"][0]["mae"] == doctest::Approx(1.5));

  const std::string csv = report.to_csv();
  CHECK(csv.find("protocol,variant,horizon,samples,mae,mape,rmse") == 0);
  CHECK(csv.find("multi_step,no_gsl,3,100,1.5,50,1.6") != std::string::npos);
}
