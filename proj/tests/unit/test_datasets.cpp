#include <doctest.h>

#include <cmath>
#include <set>

#include "cvkan/datasets.hpp"
#include "cvkan/errors.hpp"

using namespace cvkan;

TEST_CASE("symbolic functions") {
  const std::vector<Complex> one_plus_i = {{1, 1}};
  CHECK(evaluate_symbolic(SymbolicFunction::f1, one_plus_i) == Complex{0, 2});
  const std::vector<Complex> ii = {{0, 1}, {0, 1}};
  CHECK(evaluate_symbolic(SymbolicFunction::f3, ii) == Complex{-1, 0});
  const Complex s = evaluate_symbolic(SymbolicFunction::f2, one_plus_i);
  CHECK(s.real() == doctest::Approx(1.298458).epsilon(1e-6));
  CHECK(s.imag() == doctest::Approx(0.634964).epsilon(1e-6));
  CHECK(std::abs(s - std::sin(Complex{1, 1})) < 1e-14);
}

TEST_CASE("generated symbolic data agrees with the real forms") {
  for (auto f : {SymbolicFunction::f1, SymbolicFunction::f2, SymbolicFunction::f3, SymbolicFunction::f4}) {
    const Dataset d = gen_symbolic(f, 200, 5);
    CHECK(d.rows() == 200);
    CHECK(d.feature_count() == symbolic_arity(f));
    for (std::size_t r = 0; r < d.rows(); ++r) {
      std::vector<double> xy;
      for (Complex z : d.features.row(r)) {
        CHECK(GridSpec{}.contains(z));
        xy.push_back(z.real());
        xy.push_back(z.imag());
      }
      const auto [re, im] = evaluate_symbolic_real(f, xy);
      const Complex t = d.targets(r, 0);
      CHECK(std::abs(re - t.real()) <= 1e-10 * std::max(1.0, std::abs(t)));
      CHECK(std::abs(im - t.imag()) <= 1e-10 * std::max(1.0, std::abs(t)));
    }
  }
}

TEST_CASE("generation is seeded") {
  const Dataset a = gen_symbolic(SymbolicFunction::f3, 50, 1);
  const Dataset b = gen_symbolic(SymbolicFunction::f3, 50, 1);
  const Dataset c = gen_symbolic(SymbolicFunction::f3, 50, 2);
  CHECK(a.features == b.features);
  CHECK_FALSE(a.features == c.features);
}

TEST_CASE("holography") {
  CHECK(holography_target({1, 0}, {1, 0}, {0, 0}) == Complex{1, 0});
  CHECK(holography_target({0, 1}, {1, 0}, {1, 0}) == Complex{0, 4});
  const Complex h = holography_target({1, 1}, {1, 1}, {1, -1});
  CHECK(std::abs(h - Complex{4, 4}) < 1e-14);
  const Dataset d = gen_holography(100, 3);
  CHECK(d.feature_count() == 3);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    CHECK(std::abs(d.targets(r, 0) - holography_target(d.features(r, 0), d.features(r, 1), d.features(r, 2))) == 0.0);
  }
}

TEST_CASE("circuit") {
  CircuitInputs in{{1.5, -0.5}, 2.0, 4.0, 0.7, 0.3, 0.0};
  CHECK(std::abs(circuit_target(in) - Complex{1.5, -0.5} / 1.5) < 1e-14);
  in.r_g = 0.0;
  CHECK(std::abs(circuit_target(in) - Complex{1.5, -0.5}) < 1e-14);
  const CircuitInputs ex{{1, 0}, 1.0, 2.0, 1.0, 1.0, 1.0};
  CHECK(std::abs(circuit_target(ex) - Complex{0.2, -0.6}) < 1e-14);

  const CircuitDataset c = gen_circuit(500, 4);
  CHECK(c.data.rows() == 500);
  CHECK(c.data.feature_count() == 6);
  for (std::size_t r = 0; r < 500; ++r) {
    for (std::size_t f = 1; f < 6; ++f) CHECK(c.data.features(r, f).imag() == 0.0);
    CHECK(std::abs(c.data.targets(r, 0)) <= 1e6);
  }
  CHECK(c.data.feature_info[0].originally_real == false);
  CHECK(c.data.feature_info[5].originally_real == true);
}

TEST_CASE("knot CSV parsing and normalization") {
  const std::string csv =
      "a,b_re,b_im,flat,signature\n"
      "0,1,-1,7,-2\n"
      "10,3,1,7,0\n"
      "5,2,0,7,4\n";
  const KnotLoad k = parse_knots(csv);
  const Dataset& d = k.data;
  CHECK(d.feature_count() == 3);
  CHECK(d.feature_names() == std::vector<std::string>{"a", "b", "flat"});
  CHECK(d.features(2, 0) == Complex{0, 0});
  CHECK(d.features(0, 0) == Complex{-2, 0});
  CHECK(d.features(1, 1) == Complex{2, 2});
  CHECK(d.features(0, 2) == Complex{0, 0});
  CHECK(k.warnings.size() == 1);
  CHECK(d.labels == std::vector<int>{0, 1, 2});
  CHECK(d.class_values == std::vector<long long>{-2, 0, 4});

  // Reusing the constants: unseen signatures are an error.
  CHECK_THROWS_AS(parse_knots("a,b_re,b_im,flat,signature\n1,1,1,7,6\n", {}, &k.normalization), DataError);
  const KnotLoad again = parse_knots("a,b_re,b_im,flat,signature\n10,1,1,7,4\n", {}, &k.normalization);
  CHECK(again.data.features(0, 0) == Complex{2, 0});
  CHECK(again.data.labels == std::vector<int>{2});
}

TEST_CASE("knot CSV with 14 signatures") {
  std::string csv = "x,signature\n";
  for (int i = 0; i < 28; ++i) csv += std::to_string(i) + "," + std::to_string(2 * (i % 14) - 12) + "\n";
  const Dataset d = parse_knots(csv).data;
  CHECK(d.num_classes == 14);
  const std::set<int> labels(d.labels.begin(), d.labels.end());
  CHECK(labels.size() == 14);
  CHECK(*labels.begin() == 0);
  CHECK(*labels.rbegin() == 13);
}

TEST_CASE("malformed knot CSV") {
  CHECK_THROWS_AS(parse_knots(""), DataError);
  CHECK_THROWS_AS(parse_knots("a,b\n1,2\n"), DataError);
  CHECK_THROWS_AS(parse_knots("a_re,signature\n1,2\n"), DataError);
  CHECK_THROWS_AS(parse_knots("a,signature\n1\n"), DataError);
  CHECK_THROWS_AS(parse_knots("a,signature\nx,2\n"), DataError);
  CHECK_THROWS_AS(parse_knots("a,signature\n1,2.5\n"), DataError);
  CHECK_THROWS_AS(load_knots("/nonexistent/knots.csv"), DataError);
}

TEST_CASE("knot surrogate shape") {
  const Dataset d = make_knot_surrogate(700, 1);
  CHECK(d.feature_count() == 15);
  CHECK(d.num_classes == 14);
  std::size_t complex_features = 0;
  for (std::size_t f = 0; f < 15; ++f) {
    if (!d.feature_info[f].originally_real) ++complex_features;
    for (std::size_t r = 0; r < d.rows(); ++r) {
      CHECK(GridSpec{}.contains(d.features(r, f)));
      if (d.feature_info[f].originally_real) CHECK(d.features(r, f).imag() == 0.0);
    }
  }
  CHECK(complex_features == 2);
  const std::set<int> labels(d.labels.begin(), d.labels.end());
  CHECK(labels.size() == 14);
}

TEST_CASE("CSV export reloads through the knot loader") {
  const Dataset d = make_knot_surrogate(140, 2);
  const KnotLoad back = parse_knots(dataset_to_csv(d));
  CHECK(back.data.feature_names() == d.feature_names());
  CHECK(back.data.labels == d.labels);
}

TEST_CASE("split-real round trip") {
  const Dataset c = gen_circuit(50, 7).data;
  const Dataset s = to_split_real(c);
  CHECK(s.feature_count() == 7);
  CHECK(s.targets.cols() == 2);
  for (Complex z : s.features.data()) CHECK(z.imag() == 0.0);
  const Dataset back = from_split_real(s);
  CHECK(back.features == c.features);
  CHECK(back.targets == c.targets);
  CHECK(back.feature_names() == c.feature_names());

  const Dataset f1 = gen_symbolic(SymbolicFunction::f1, 100, 8);
  const Dataset r = to_split_real(f1);
  CHECK(r.feature_count() == 2);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    const double x = r.features(i, 0).real(), y = r.features(i, 1).real();
    CHECK(r.targets(i, 0).real() == doctest::Approx(x * x - y * y).epsilon(1e-12));
    CHECK(r.targets(i, 1).real() == doctest::Approx(2 * x * y).epsilon(1e-12));
  }

  const Dataset k = make_knot_surrogate(100, 3);
  const Dataset ks = to_split_real(k);
  CHECK(ks.feature_count() == 17);
  CHECK(ks.labels == k.labels);
}
