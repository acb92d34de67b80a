#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cvkan/errors.hpp"
#include "cvkan/explain.hpp"
#include "cvkan/training.hpp"
#include "finite_difference.hpp"

using namespace cvkan;

namespace {

Architecture arch(std::vector<std::size_t> widths, NormVariant norm = NormVariant::bn_c) {
  Architecture a;
  a.widths = std::move(widths);
  a.norm = norm;
  return a;
}

void check_conservation(const RelevanceReport& r) {
  const std::size_t depth = r.widths.size() - 1;
  for (double v : r.vertex_scores[depth]) CHECK(v == 1.0);
  for (std::size_t l = 0; l < depth; ++l) {
    for (std::size_t q = 0; q < r.widths[l + 1]; ++q) {
      double incoming = 0.0;
      for (std::size_t p = 0; p < r.widths[l]; ++p) {
        CHECK(r.edge(l, q, p) >= 0.0);
        incoming += r.edge(l, q, p);
      }
      CHECK(incoming == doctest::Approx(r.vertex_scores[l + 1][q]).epsilon(1e-12));
    }
    for (std::size_t p = 0; p < r.widths[l]; ++p) {
      double outgoing = 0.0;
      for (std::size_t q = 0; q < r.widths[l + 1]; ++q) outgoing += r.edge(l, q, p);
      CHECK(outgoing == doctest::Approx(r.vertex_scores[l][p]).epsilon(1e-12));
    }
  }
}

}  // namespace

TEST_CASE("complex standard deviation") {
  const std::vector<Complex> constant(10, Complex{1.5, -2.0});
  CHECK(complex_std(constant) == 0.0);
  const std::vector<Complex> pm = {{1, 0}, {-1, 0}};
  CHECK(complex_std(pm) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(complex_std(std::vector<Complex>{{1, 1}}), StatisticsError);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<Complex> z(1000);
  for (auto& v : z) v = {n(rng) + 4.0, n(rng) - 1.0};
  // Two-pass over separate real and imaginary sums.
  double sr = 0.0, si = 0.0;
  for (const auto& v : z) {
    sr += v.real();
    si += v.imag();
  }
  sr /= 1000.0;
  si /= 1000.0;
  double ss = 0.0;
  for (const auto& v : z) ss += (v.real() - sr) * (v.real() - sr) + (v.imag() - si) * (v.imag() - si);
  CHECK(std::abs(complex_std(z) - std::sqrt(ss / 999.0)) < 1e-12);
}

TEST_CASE("relevance of a single edge") {
  const Model m = Model::init(arch({1, 1}), 1);
  std::mt19937_64 rng(2);
  const RelevanceReport r = relevance(m, testing::random_batch(50, 1, rng));
  CHECK(r.edge(0, 0, 0) == 1.0);
  CHECK(r.vertex_scores[0][0] == 1.0);
}

TEST_CASE("two parallel edges with equal spread split evenly") {
  Model m = Model::init(arch({2, 1}), 1);
  EdgeFunction e = m.edge(0, 0, 0);
  m.set_edge(0, 0, 1, e);
  std::mt19937_64 rng(3);
  ComplexBatch x = testing::random_batch(40, 2, rng);
  for (std::size_t i = 0; i < 40; ++i) x(i, 1) = x(i, 0);
  const RelevanceReport r = relevance(m, x);
  CHECK(r.edge(0, 0, 0) == doctest::Approx(0.5));
  CHECK(r.edge(0, 0, 1) == doctest::Approx(0.5));
}

TEST_CASE("relevance is conserved in deep models") {
  const Model m = Model::init(arch({3, 4, 2, 2}), 4);
  std::mt19937_64 rng(4);
  const RelevanceReport r = relevance(m, testing::random_batch(64, 3, rng));
  check_conservation(r);
  CHECK(r.vertex_std.size() == 4);
}

TEST_CASE("constant edges get a uniform split with a warning") {
  Model m = Model::init(arch({2, 1}), 1);
  for (std::size_t p = 0; p < 2; ++p) {
    m.set_edge(0, 0, p, EdgeFunction::zeros(GridSpec{}, CsiluVariant::complex_weight, OutputDomain::complex));
  }
  std::mt19937_64 rng(5);
  const RelevanceReport r = relevance(m, testing::random_batch(10, 2, rng));
  CHECK(r.edge(0, 0, 0) == 0.5);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("feature ranking and pruning") {
  RelevanceReport r;
  r.widths = {4, 1};
  r.vertex_scores = {{0.1, 0.4, 0.1, 0.4}, {1.0}};
  CHECK(rank_features(r) == std::vector<std::size_t>{1, 3, 0, 2});
  RelevanceReport flat = r;
  flat.vertex_scores[0] = {0.25, 0.25, 0.25, 0.25};
  CHECK(rank_features(flat) == std::vector<std::size_t>{0, 1, 2, 3});

  Dataset d = make_knot_surrogate(28, 1);
  d = d.select_features(std::vector<std::size_t>{0, 1, 2, 3});
  const Dataset keep = prune_features(d, r, PruneMode::keep_top_k, 2);
  const Dataset drop = prune_features(d, r, PruneMode::drop_top_k, 2);
  CHECK(keep.feature_names() == std::vector<std::string>{d.feature_names()[1], d.feature_names()[3]});
  CHECK(drop.feature_names() == std::vector<std::string>{d.feature_names()[0], d.feature_names()[2]});
  CHECK(prune_features(d, r, PruneMode::keep_top_k, 4).features == d.features);
  CHECK_THROWS_AS(prune_features(d, r, PruneMode::keep_top_k, 5), ConfigError);
}

TEST_CASE("phase range") {
  CHECK(phase_of({-1.0, -0.0}) == doctest::Approx(std::numbers::pi));
  CHECK(phase_of({-1.0, 0.0}) == doctest::Approx(std::numbers::pi));
  CHECK(phase_of({0.0, -1.0}) == doctest::Approx(-std::numbers::pi / 2));
}

TEST_CASE("edge surfaces") {
  const EdgeFunction zero = EdgeFunction::zeros(GridSpec{}, CsiluVariant::complex_weight, OutputDomain::complex);
  const EdgeSurface s = sample_edge_surface(zero, 5);
  CHECK(s.magnitude.size() == 25);
  for (double v : s.magnitude) CHECK(v == 0.0);

  // Conjugation symmetry needs real weights mirrored in the imaginary grid index and no odd-breaking
  // residual on the imaginary channel (SiLU is not odd).
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  EdgeFunction e = EdgeFunction::zeros(GridSpec{}, CsiluVariant::real_weight, OutputDomain::complex);
  for (auto& w : e.weights) w = {n(rng), 0.0};
  const int G = e.grid.points;
  for (int u = 0; u < G; ++u) {
    for (int v = 0; v < G / 2; ++v) e.weights[static_cast<std::size_t>(u * G + (G - 1 - v))] = e.weights[static_cast<std::size_t>(u * G + v)];
  }
  e.csilu.w1 = 0.8;
  e.csilu.w2 = 0.0;
  e.csilu.beta = {0.3, 0.0};
  const std::size_t R = 9;
  const EdgeSurface c = sample_edge_surface(e, R);
  for (std::size_t u = 0; u < R; ++u) {
    for (std::size_t v = 0; v < R; ++v) {
      const std::size_t mirror = u * R + (R - 1 - v);
      CHECK(c.magnitude[u * R + v] == doctest::Approx(c.magnitude[mirror]).epsilon(1e-12));
      if (c.magnitude[u * R + v] > 1e-9 && std::abs(std::abs(c.phase[u * R + v]) - std::numbers::pi) > 1e-9) {
        CHECK(c.phase[u * R + v] == doctest::Approx(-c.phase[mirror]).epsilon(1e-9));
      }
    }
  }
  CHECK_THROWS_AS(sample_edge_surface(e, 1), ConfigError);
}

TEST_CASE("surface of a fitted z^2 edge winds twice") {
  ExperimentConfig c;
  c.dataset.id = "f1";
  c.dataset.samples = 2000;
  c.arch.widths = {1, 1};
  const Dataset d = resolve_dataset(c.dataset, 0, c.arch.grid);
  Model m = Model::init(c.arch, 0);
  TrainOptions o;
  o.epochs = 150;
  o.optimizer.adam.lr = 1e-2;
  train(m, d, o);
  const EdgeFunction e = m.edge(0, 0, 0);
  // Winding number of f around 0 along |z| = 0.5.
  const int steps = 720;
  double total = 0.0;
  double prev = phase_of(edge_forward({0.5, 0.0}, e));
  for (int k = 1; k <= steps; ++k) {
    const double t = 2.0 * std::numbers::pi * k / steps;
    const double ph = phase_of(edge_forward({0.5 * std::cos(t), 0.5 * std::sin(t)}, e));
    double d = ph - prev;
    if (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
    if (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
    total += d;
    prev = ph;
  }
  CHECK(std::lround(total / (2.0 * std::numbers::pi)) == 2);
}

TEST_CASE("viewer document") {
  const Model m = Model::init(arch({2, 1}), 7);
  std::mt19937_64 rng(8);
  const ComplexBatch x = testing::random_batch(30, 2, rng);
  const RelevanceReport r = relevance(m, x, "test");
  const VizDocument doc = build_viz(m, r, 4, {"z1", "z2"});
  CHECK(doc.surfaces.size() == 2);
  const std::string text = viz_to_json_text(doc);
  CHECK(validate_viz_json_text(text).empty());
  CHECK(viz_to_json_text(build_viz(m, r, 4, {"z1", "z2"})) == text);

  const VizDocument back = viz_from_json_text(text);
  CHECK(std::equal(back.model.parameters().begin(), back.model.parameters().end(), m.parameters().begin(),
                   m.parameters().end()));
  CHECK(back.relevance.edge_scores == r.edge_scores);
  CHECK(back.surfaces[1].phase == doc.surfaces[1].phase);
  CHECK(back.feature_names == doc.feature_names);

  CHECK_THROWS_AS(build_viz(m, r, 4, {"only one"}), ShapeError);
  CHECK_FALSE(validate_viz_json_text("{\"version\": 1}").empty());
  CHECK_FALSE(validate_viz_json_text("not json").empty());
  std::string broken = text;
  broken.replace(broken.find("\"version\":1"), 11, "\"version\":9");
  CHECK_FALSE(validate_viz_json_text(broken).empty());
  CHECK_THROWS_AS(viz_from_json_text(broken), ConfigError);
}
