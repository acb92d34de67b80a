#include <doctest.h>

#include <cmath>
#include <limits>

#include "cvkan/autodiff.hpp"
#include "cvkan/complex.hpp"
#include "cvkan/errors.hpp"
#include "gradient_suite.hpp"

using namespace cvkan;

TEST_CASE("complex arithmetic") {
  CHECK(complex_mul({1, 1}, {1, 1}) == Complex{0, 2});
  CHECK(complex_abs2({1, 1}) == 2.0);
  CHECK(complex_add({3, 4}, {-3, -4}) == Complex{0, 0});
}

TEST_CASE("complex batch shape checks") {
  CHECK_THROWS_AS(ComplexBatch(0, 3), ShapeError);
  CHECK_THROWS_AS(ComplexBatch(2, 2, std::vector<Complex>(3)), ShapeError);
  ComplexBatch b(2, 3);
  b(1, 2) = {1, -1};
  CHECK(b.row(1)[2] == Complex{1, -1});
  CHECK(b.column(2)[1] == Complex{1, -1});
  CHECK(b.all_finite());
  b(0, 0) = {std::numeric_limits<double>::quiet_NaN(), 0};
  CHECK_FALSE(b.all_finite());
  const std::vector<std::size_t> cols = {2};
  CHECK(b.select_cols(cols).cols() == 1);
}

TEST_CASE("grad of p0^2 at 3 is 6") {
  const TapeFunction f = [](Tape&, std::span<const Var> p) { return p[0] * p[0]; };
  const std::vector<double> g = grad(f, std::vector<double>{3.0});
  REQUIRE(g.size() == 1);
  CHECK(g[0] == doctest::Approx(6.0));
}

TEST_CASE("grad of a constant is zero") {
  const TapeFunction f = [](Tape& t, std::span<const Var>) { return t.variable(4.2); };
  const std::vector<double> g = grad(f, std::vector<double>{1.0, 2.0, 3.0});
  CHECK(g == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("non-finite tape values name the operation") {
  const TapeFunction f = [](Tape&, std::span<const Var> p) { return log(p[0]); };
  try {
    grad(f, std::vector<double>{-1.0});
    FAIL("expected GradientError");
  } catch (const GradientError& e) {
    CHECK(std::string(e.what()).find("log") != std::string::npos);
  }
}

TEST_CASE("tape operations match finite differences") {
  const auto r = testing::check_tape(11);
  CHECK(r.worst() < testing::kGradientTolerance);
}

TEST_CASE("1x1 model MSE on 8 samples matches finite differences") {
  Architecture arch;
  arch.widths = {1, 1};
  const auto r = testing::check_model(arch, 5, 8, 3);
  CHECK(r.worst() < testing::kGradientTolerance);
}
