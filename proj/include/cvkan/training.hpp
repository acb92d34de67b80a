#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cvkan/datasets.hpp"
#include "cvkan/model.hpp"
#include "cvkan/optimizer.hpp"

namespace cvkan {

struct DatasetSpec {
  /// f1 | f2 | f3 | f4 | holography | circuit | knots | knots_surrogate
  std::string id = "f1";
  /// Generated rows, or a seeded random subset of the knot CSV when smaller than the file.
  std::size_t samples = 5000;
  /// Defaults to the experiment seed.
  std::optional<std::uint64_t> seed;
  /// Knot CSV location (id == knots).
  std::string path;
  /// Feed the dataset through to_split_real (FastKAN baselines).
  bool split_real = false;
  /// Optional restriction to these feature columns (pruning studies).
  std::vector<std::size_t> features;

  bool operator==(const DatasetSpec&) const = default;
};

struct OptimizerConfig {
  AdamHyper adam;
  std::size_t batch_size = 256;
};

struct ExperimentConfig {
  std::string name;
  DatasetSpec dataset;
  Architecture arch;
  OptimizerConfig optimizer;
  std::size_t epochs = 1000;
  std::size_t folds = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Test-set metrics. Regression fills mse/mae, classification fills ce/acc.
struct Metrics {
  std::optional<double> mse;
  std::optional<double> mae;
  std::optional<double> ce;
  std::optional<double> acc;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  Metrics test;
  /// Mean training loss per epoch.
  std::vector<double> loss_trajectory;
  bool diverged = false;
  std::string error;
};

struct MetricSummary {
  double mean = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single value.
  double std = 0.0;
  std::size_t count = 0;
};

struct RunSummary {
  std::string dataset;
  std::string model;
  std::string size;
  std::size_t params = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  std::map<std::string, MetricSummary> metrics;
  std::size_t diverged = 0;
};

MetricSummary summarize(const std::vector<double>& values);

/// Fold id of every row: a seeded permutation cut into k contiguous chunks whose sizes
/// differ by at most one.
std::vector<std::size_t> fold_assignment(std::size_t rows, std::size_t folds, std::uint64_t seed);

/// Per-fold model seed, derived from the master seed.
std::uint64_t fold_seed(std::uint64_t master, std::size_t fold);

/// Builds the dataset described by the spec (generated, loaded, split, restricted).
Dataset resolve_dataset(const DatasetSpec& spec, std::uint64_t default_seed, const GridSpec& grid);

/// Loss used for training on this dataset (MSE for regression, CE for classification).
double training_loss(const ComplexBatch& pred, const Dataset& d);
ComplexBatch training_loss_grad(const ComplexBatch& pred, const Dataset& d);

Metrics evaluate(const Model& model, const Dataset& data);

struct TrainOptions {
  std::size_t epochs = 1000;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  /// Called after each epoch with (epoch, mean training loss).
  std::function<void(std::size_t, double)> on_epoch;
};

/// Mini-batch Adam on shuffled batches. A trailing batch of one row is merged into the
/// previous one so batch statistics stay defined. Returns the per-epoch mean loss;
/// throws TrainingError on a non-finite loss or gradient.
std::vector<double> train(Model& model, const Dataset& train_set, const TrainOptions& options);

struct CvOptions {
  /// Receives the trained model of fold 0.
  std::function<void(const Model&)> on_fold0_model;
  std::function<void(std::size_t fold, std::size_t epoch, double loss)> on_epoch;
};

RunSummary run_cv(const ExperimentConfig& config, const Dataset& data, const CvOptions& options = {});
RunSummary run_cv(const ExperimentConfig& config, const CvOptions& options = {});

}  // namespace cvkan
