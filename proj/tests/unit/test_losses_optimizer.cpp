#include <doctest.h>

#include <cmath>
#include <limits>

#include "cvkan/errors.hpp"
#include "cvkan/losses.hpp"
#include "cvkan/optimizer.hpp"
#include "gradient_suite.hpp"

using namespace cvkan;

TEST_CASE("mse") {
  const ComplexBatch a(2, 1, {{1, 2}, {3, 4}});
  CHECK(loss_mse(a, a) == 0.0);
  CHECK(loss_mse(ComplexBatch(1, 1, {{3, 4}}), ComplexBatch(1, 1)) == 25.0);
  CHECK(loss_mse(ComplexBatch(2, 1, {{1, 0}, {0, 1}}), ComplexBatch(2, 1)) == 1.0);
  CHECK_THROWS_AS(loss_mse(a, ComplexBatch(1, 1)), ShapeError);
}

TEST_CASE("mae") {
  const ComplexBatch a(2, 1, {{1, 2}, {3, 4}});
  CHECK(loss_mae(a, a) == 0.0);
  CHECK(loss_mae(ComplexBatch(1, 1, {{3, 4}}), ComplexBatch(1, 1)) == 5.0);
  CHECK(loss_mae(ComplexBatch(2, 1, {{2, 0}, {0, 2}}), ComplexBatch(2, 1)) == 2.0);
  const ComplexBatch g = loss_mae_grad(a, a);
  for (Complex z : g.data()) CHECK(z == Complex{0, 0});
}

TEST_CASE("cross-entropy and accuracy") {
  const std::vector<int> label0 = {0};
  ComplexBatch uniform(1, 14);
  CHECK(loss_ce(uniform, label0) == doctest::Approx(std::log(14.0)));
  CHECK(loss_ce(uniform, label0) == doctest::Approx(2.639057).epsilon(1e-6));

  const ComplexBatch logits(1, 3, {{2, 0}, {1, 0}, {0, 0}});
  const double expect = -std::log(std::exp(2.0) / (std::exp(2.0) + std::exp(1.0) + 1.0));
  CHECK(loss_ce(logits, label0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(loss_ce(logits, label0) == doctest::Approx(0.407606).epsilon(1e-6));

  const ComplexBatch confident(2, 3, {{50, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {50, 0}});
  const std::vector<int> labels = {0, 2};
  CHECK(loss_ce(confident, labels) < 1e-12);
  CHECK(metric_accuracy(confident, labels) == 1.0);
  CHECK(metric_accuracy(confident, std::vector<int>{1, 2}) == 0.5);
  CHECK_THROWS(loss_ce(confident, std::vector<int>{0, 3}));
}

TEST_CASE("loss gradients match finite differences") {
  for (const char* which : {"mse", "mae", "ce"}) {
    const auto r = testing::check_loss(which, 41, 3);
    INFO(r.name);
    CHECK(r.worst() < testing::kGradientTolerance);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> p = {1.0, -2.0};
  const std::vector<double> g = {0.0, 0.0};
  AdamState s(2);
  adam_step(p, g, s, AdamHyper{});
  CHECK(p == std::vector<double>{1.0, -2.0});
  CHECK(s.step == 1);
}

TEST_CASE("adam: first step") {
  std::vector<double> p = {0.0};
  AdamState s(1);
  adam_step(p, std::vector<double>{1.0}, s, AdamHyper{});
  // m_hat = 1, v_hat = 1 -> -lr * 1 / (1 + eps)
  CHECK(p[0] == doctest::Approx(-1e-3 / (1.0 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam: constant gradient moves monotonically") {
  std::vector<double> p = {0.0, 0.0};
  AdamState s(2);
  double prev0 = 0.0, prev1 = 0.0;
  for (int i = 0; i < 100; ++i) {
    adam_step(p, std::vector<double>{0.3, -2.0}, s, AdamHyper{});
    CHECK(p[0] < prev0);
    CHECK(p[1] > prev1);
    prev0 = p[0];
    prev1 = p[1];
  }
}

TEST_CASE("adam: non-finite gradient is rejected before any update") {
  std::vector<double> p = {1.0, 1.0};
  AdamState s(2);
  CHECK_THROWS_AS(adam_step(p, std::vector<double>{0.5, std::numeric_limits<double>::infinity()}, s, AdamHyper{}),
                  TrainingError);
  CHECK(p == std::vector<double>{1.0, 1.0});
  CHECK(s.step == 0);
}
