#include <doctest.h>

#include <filesystem>
#include <random>

#include "cvkan/config.hpp"
#include "cvkan/errors.hpp"
#include "cvkan/serialize.hpp"
#include "finite_difference.hpp"

using namespace cvkan;
using nlohmann::json;

TEST_CASE("model JSON round trip is exact") {
  Architecture a;
  a.widths = {2, 3, 1};
  Model m = Model::init(a, 9);
  std::mt19937_64 rng(1);
  m.forward(testing::random_batch(16, 2, rng), Mode::train);
  const Model back = model_from_json(json::parse(model_to_json(m).dump()));
  CHECK(back.architecture() == m.architecture());
  CHECK(std::equal(back.parameters().begin(), back.parameters().end(), m.parameters().begin(), m.parameters().end()));
  CHECK(back.norms()[0].running()[1] == m.norms()[0].running()[1]);
  const ComplexBatch x = testing::random_batch(5, 2, rng);
  CHECK(back.predict(x) == m.predict(x));
}

TEST_CASE("model documents are versioned") {
  Architecture a;
  a.widths = {1, 1};
  json j = model_to_json(Model::init(a, 0));
  j["version"] = 99;
  CHECK_THROWS_AS(model_from_json(j), ConfigError);
  j["version"] = kModelFormatVersion;
  j["parameters"] = std::vector<double>{1.0};
  CHECK_THROWS_AS(model_from_json(j), ConfigError);
  CHECK_THROWS_AS(model_from_json(json::object()), ConfigError);
}

TEST_CASE("save and load through a file") {
  Architecture a;
  a.widths = {1, 2, 1};
  const Model m = Model::init(a, 3);
  const auto path = std::filesystem::temp_directory_path() / "cvkan_unit_model.json";
  save_model(m, path);
  const Model back = load_model(path);
  CHECK(std::equal(back.parameters().begin(), back.parameters().end(), m.parameters().begin(), m.parameters().end()));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model(path), IoError);
}

TEST_CASE("experiment config parsing") {
  const json j = json::parse(R"({
    "name": "x",
    "dataset": {"id": "holography", "samples": 100, "seed": 4},
    "model": {"widths": "3x10x1", "norm": "bn_v", "grid": {"points": 6, "lo": -1, "hi": 1}},
    "optimizer": {"lr": 0.01, "batch_size": 64},
    "epochs": 10, "folds": 4, "seed": 2
  })");
  const ExperimentConfig c = parse_experiment_config(j);
  CHECK(c.dataset.id == "holography");
  CHECK(*c.dataset.seed == 4);
  CHECK(c.arch.widths == std::vector<std::size_t>{3, 10, 1});
  CHECK(c.arch.norm == NormVariant::bn_v);
  CHECK(c.arch.grid.points == 6);
  CHECK(c.arch.grid.lo == -1.0);
  CHECK(c.optimizer.adam.lr == 0.01);
  CHECK(c.optimizer.batch_size == 64);
  CHECK(c.folds == 4);

  const ExperimentConfig again = parse_experiment_config(experiment_config_to_json(c));
  CHECK(config_hash(again) == config_hash(c));
  ExperimentConfig other = c;
  other.seed = 3;
  CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("strict config parsing") {
  auto parse = [](const char* text) { return parse_experiment_config(json::parse(text)); };
  CHECK_THROWS_AS(parse(R"({"dataset": {"id": "f1"}, "model": {"widths": [1, 1]}, "epoch": 5})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"dataset": {"id": "f1", "size": 5}, "model": {"widths": [1, 1]}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"dataset": {"id": "f1"}, "model": {"widths": [1, 1], "grid": {"G": 8}}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"dataset": {"id": "f1"}, "model": {"widths": [1, 1]}, "epochs": -3})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"dataset": {"id": "f1"}, "model": {"widths": [1, 1]}, "epochs": "ten"})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"dataset": {"id": "f1"}, "model": {"widths": [1, 1], "norm": "layer"}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"model": {"widths": [1, 1]}})"), ConfigError);
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : std::filesystem::directory_iterator(CVKAN_CONFIG_DIR)) {
    INFO(entry.path().string());
    CHECK_NOTHROW(load_experiment_config(entry.path()));
  }
}

TEST_CASE("run summary exports") {
  RunSummary s;
  s.dataset = "f1";
  s.model = "cvkan";
  s.size = "1x1";
  s.params = 132;
  s.seed = 7;
  FoldResult f;
  f.fold = 0;
  f.test.mse = 0.5;
  f.test.mae = 0.25;
  s.folds.push_back(f);
  s.metrics["mse"] = {0.5, 0.0, 1};
  s.metrics["mae"] = {0.25, 0.0, 1};
  const std::string csv = run_summary_to_csv(s);
  CHECK(csv.rfind("dataset,model,size,fold,mse,mae,ce,acc,params,seed\n", 0) == 0);
  CHECK(csv.find("f1,cvkan,1x1,0,0.5,0.25,,,132,7\n") != std::string::npos);
  const json j = run_summary_to_json(s);
  CHECK(j["params"] == 132);
  CHECK(j["metrics"]["mse"]["mean"] == 0.5);
}
