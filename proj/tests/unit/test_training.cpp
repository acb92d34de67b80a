#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cvkan/errors.hpp"
#include "cvkan/losses.hpp"
#include "cvkan/optimizer.hpp"
#include "cvkan/training.hpp"

using namespace cvkan;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.dataset.id = "f1";
  c.dataset.samples = 120;
  c.arch.widths = {1, 1};
  c.epochs = 3;
  c.folds = 3;
  c.seed = 5;
  c.optimizer.batch_size = 32;
  return c;
}

}  // namespace

TEST_CASE("fold assignment") {
  const auto a = fold_assignment(5000, 5, 1);
  std::vector<std::size_t> sizes(5, 0);
  for (std::size_t f : a) ++sizes[f];
  CHECK(sizes == std::vector<std::size_t>(5, 1000));

  const auto b = fold_assignment(13, 5, 2);
  std::vector<std::size_t> s2(5, 0);
  for (std::size_t f : b) ++s2[f];
  for (std::size_t s : s2) CHECK((s == 2 || s == 3));
  CHECK(fold_assignment(13, 5, 2) == b);
  CHECK_THROWS(fold_assignment(3, 5, 0));
}

TEST_CASE("summary statistics") {
  const MetricSummary s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(summarize({7.0}).std == 0.0);
}

TEST_CASE("config validation") {
  ExperimentConfig c = small_config();
  c.folds = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.dataset.id = "mnist";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.arch.widths = {2, 1};
  CHECK_THROWS_AS(run_cv(c), ConfigError);
}

TEST_CASE("run_cv is deterministic") {
  const ExperimentConfig c = small_config();
  const RunSummary a = run_cv(c);
  const RunSummary b = run_cv(c);
  REQUIRE(a.folds.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.folds[k].loss_trajectory == b.folds[k].loss_trajectory);
    CHECK(*a.folds[k].test.mse == *b.folds[k].test.mse);
    CHECK(a.folds[k].test_size == 40);
  }
  CHECK(a.params == 132);
  std::vector<double> mse;
  for (const auto& f : a.folds) mse.push_back(*f.test.mse);
  CHECK(a.metrics.at("mse").mean == summarize(mse).mean);
  CHECK(a.metrics.at("mse").std == summarize(mse).std);
}

TEST_CASE("training reduces the loss") {
  ExperimentConfig c = small_config();
  c.epochs = 60;
  const Dataset d = resolve_dataset(c.dataset, 1, c.arch.grid);
  Model m = Model::init(c.arch, 2);
  const double before = *evaluate(m, d).mse;
  TrainOptions o;
  o.epochs = c.epochs;
  o.optimizer = c.optimizer;
  o.optimizer.adam.lr = 1e-2;
  const auto history = train(m, d, o);
  CHECK(history.size() == 60);
  CHECK(history.back() < history.front());
  CHECK(*evaluate(m, d).mse < before);
}

TEST_CASE("a trailing single-row batch is merged") {
  ExperimentConfig c = small_config();
  c.arch.widths = {1, 2, 1};
  c.dataset.samples = 33;
  const Dataset d = resolve_dataset(c.dataset, 1, c.arch.grid);
  Model m = Model::init(c.arch, 1);
  TrainOptions o;
  o.epochs = 2;
  o.optimizer.batch_size = 32;
  CHECK_NOTHROW(train(m, d, o));
}

TEST_CASE("diverged folds are reported, not dropped") {
  ExperimentConfig c = small_config();
  c.optimizer.adam.lr = 1e300;
  c.epochs = 5;
  const RunSummary s = run_cv(c);
  CHECK(s.folds.size() == 3);
  CHECK(s.diverged == 3);
  for (const auto& f : s.folds) {
    CHECK(f.diverged);
    CHECK_FALSE(f.error.empty());
  }
  CHECK(s.metrics.empty());
}

TEST_CASE("split-real regression metrics are computed on recombined values") {
  ExperimentConfig c = small_config();
  c.dataset.split_real = true;
  c.arch.kind = ModelKind::fastkan;
  c.arch.norm = NormVariant::bn_real;
  c.arch.widths = {2, 3, 2};
  const Dataset d = resolve_dataset(c.dataset, 1, c.arch.grid);
  const Model m = Model::init(c.arch, 3);
  const Metrics got = evaluate(m, d);
  const ComplexBatch p = recombine_pairs(m.predict(d.features));
  const ComplexBatch t = recombine_pairs(d.targets);
  CHECK(*got.mse == loss_mse(p, t));
  CHECK(*got.mae == loss_mae(p, t));
}

TEST_CASE("classification training on the knot surrogate") {
  ExperimentConfig c;
  c.dataset.id = "knots_surrogate";
  c.dataset.samples = 280;
  c.arch.widths = {15, 1, 14};
  c.arch.norm = NormVariant::bn_v;
  c.arch.output_domain = OutputDomain::real;
  c.epochs = 2;
  c.folds = 2;
  const RunSummary s = run_cv(c);
  CHECK(s.metrics.count("acc") == 1);
  CHECK(s.metrics.count("ce") == 1);
  CHECK(s.params == 2921);
}

TEST_CASE("feature restriction") {
  DatasetSpec spec;
  spec.id = "holography";
  spec.samples = 10;
  spec.features = {2, 0};
  const Dataset d = resolve_dataset(spec, 0, GridSpec{});
  CHECK(d.feature_names() == std::vector<std::string>{"E_0", "E_R_hat"});
  spec.features = {3};
  CHECK_THROWS_AS(resolve_dataset(spec, 0, GridSpec{}), ConfigError);
}

TEST_CASE("one small step on a single sample lowers its loss") {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Architecture a;
    a.widths = {1, 1};
    Model m = Model::init(a, seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const ComplexBatch x(1, 1, {{u(rng), u(rng)}});
    const ComplexBatch t(1, 1, {{u(rng), u(rng)}});
    const double before = loss_mse(m.forward(x, Mode::train), t);
    std::vector<double> g(m.param_count());
    m.backward(loss_mse_grad(m.predict(x), t), g);
    AdamState state(g.size());
    AdamHyper h;
    h.lr = 1e-5;
    adam_step(m.parameters(), g, state, h);
    if (!(loss_mse(m.predict(x), t) < before)) ++failures;
  }
  CHECK(failures <= 1);
}

TEST_CASE("metrics do not depend on sample order") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexBatch p(50, 2), t(50, 2);
  for (auto& z : p.data()) z = {n(rng), n(rng)};
  for (auto& z : t.data()) z = {n(rng), n(rng)};
  std::vector<std::size_t> order(50);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  ComplexBatch ps(50, 2), ts(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      ps(i, c) = p(order[i], c);
      ts(i, c) = t(order[i], c);
    }
  }
  CHECK(loss_mse(ps, ts) == doctest::Approx(loss_mse(p, t)).epsilon(1e-14));
  CHECK(loss_mae(ps, ts) == doctest::Approx(loss_mae(p, t)).epsilon(1e-14));
}
