#include "cvkan/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cvkan/errors.hpp"
#include "cvkan/losses.hpp"

namespace cvkan {

namespace {

bool known_dataset(const std::string& id) {
  static const char* kIds[] = {"f1", "f2", "f3", "f4", "holography", "circuit", "knots", "knots_surrogate"};
  return std::find(std::begin(kIds), std::end(kIds), id) != std::end(kIds);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

void ExperimentConfig::validate() const {
  arch.validate();
  if (!known_dataset(dataset.id)) throw ConfigError("unknown dataset id '" + dataset.id + "'");
  if (dataset.id == "knots" && dataset.path.empty()) throw ConfigError("dataset 'knots' needs a CSV path");
  if (dataset.samples == 0) throw ConfigError("dataset.samples must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (optimizer.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  const auto& a = optimizer.adam;
  if (!(a.lr > 0.0) || !std::isfinite(a.lr)) throw ConfigError("lr must be positive");
  if (!(a.beta1 >= 0.0 && a.beta1 < 1.0) || !(a.beta2 >= 0.0 && a.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(a.eps > 0.0)) throw ConfigError("Adam eps must be positive");
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<std::size_t> fold_assignment(std::size_t rows, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (rows < folds) throw DataError("fewer rows than folds");
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> out(rows);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t size = rows / folds + (k < rows % folds ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) out[perm[pos++]] = k;
  }
  return out;
}

std::uint64_t fold_seed(std::uint64_t master, std::size_t fold) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(fold) + 1));
}

Dataset resolve_dataset(const DatasetSpec& spec, std::uint64_t default_seed, const GridSpec& grid) {
  const std::uint64_t seed = spec.seed.value_or(default_seed);
  Dataset d;
  if (spec.id == "f1" || spec.id == "f2" || spec.id == "f3" || spec.id == "f4") {
    d = gen_symbolic(parse_symbolic(spec.id), spec.samples, seed, grid);
  } else if (spec.id == "holography") {
    d = gen_holography(spec.samples, seed, grid);
  } else if (spec.id == "circuit") {
    d = gen_circuit(spec.samples, seed, grid).data;
  } else if (spec.id == "knots") {
    d = load_knots(spec.path, grid).data;
    if (spec.samples < d.rows()) {
      std::vector<std::size_t> rows(d.rows());
      std::iota(rows.begin(), rows.end(), 0);
      std::mt19937_64 rng(seed);
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(spec.samples);
      std::sort(rows.begin(), rows.end());
      d = d.subset(rows);
    }
  } else if (spec.id == "knots_surrogate") {
    d = make_knot_surrogate(spec.samples, seed, grid);
  } else {
    throw ConfigError("unknown dataset id '" + spec.id + "'");
  }
  if (!spec.features.empty()) {
    for (std::size_t c : spec.features) {
      if (c >= d.feature_count()) throw ConfigError("feature index " + std::to_string(c) + " out of range");
    }
    d = d.select_features(spec.features);
  }
  if (spec.split_real) d = to_split_real(d);
  return d;
}

double training_loss(const ComplexBatch& pred, const Dataset& d) {
  return d.task == TaskKind::regression ? loss_mse(pred, d.targets) : loss_ce(pred, d.labels);
}

ComplexBatch training_loss_grad(const ComplexBatch& pred, const Dataset& d) {
  return d.task == TaskKind::regression ? loss_mse_grad(pred, d.targets) : loss_ce_grad(pred, d.labels);
}

Metrics evaluate(const Model& model, const Dataset& data) {
  const ComplexBatch pred = model.predict(data.features);
  Metrics m;
  if (data.task == TaskKind::regression) {
    if (data.split_real) {
      const ComplexBatch p = recombine_pairs(pred);
      const ComplexBatch t = recombine_pairs(data.targets);
      m.mse = loss_mse(p, t);
      m.mae = loss_mae(p, t);
    } else {
      m.mse = loss_mse(pred, data.targets);
      m.mae = loss_mae(pred, data.targets);
    }
  } else {
    m.ce = loss_ce(pred, data.labels);
    m.acc = metric_accuracy(pred, data.labels);
  }
  return m;
}

namespace {

void check_shapes(const Architecture& arch, const Dataset& d) {
  if (arch.widths.front() != d.feature_count()) {
    throw ConfigError("model input width " + std::to_string(arch.widths.front()) + " does not match " +
                      std::to_string(d.feature_count()) + " dataset features");
  }
  if (arch.widths.back() != d.output_width()) {
    throw ConfigError("model output width " + std::to_string(arch.widths.back()) + " does not match " +
                      std::to_string(d.output_width()) + " dataset outputs");
  }
}

}  // namespace

std::vector<double> train(Model& model, const Dataset& train_set, const TrainOptions& options) {
  check_shapes(model.architecture(), train_set);
  const std::size_t n = train_set.rows();
  if (n < 2) throw TrainingError("training needs at least two rows");
  const std::size_t bs = std::max<std::size_t>(2, options.optimizer.batch_size);
  std::mt19937_64 rng(options.seed);
  AdamState state(model.param_count());
  std::vector<double> grads(model.param_count());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> history;
  history.reserve(options.epochs);
  const bool regression = train_set.task == TaskKind::regression;

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += bs) batches.emplace_back(start, std::min(n, start + bs));
    if (batches.size() > 1 && batches.back().second - batches.back().first == 1) {
      batches.pop_back();
      batches.back().second = n;
    }
    double total = 0.0;
    for (const auto& [b, e] : batches) {
      const std::span<const std::size_t> idx(perm.data() + b, e - b);
      const ComplexBatch x = train_set.features.select_rows(idx);
      const ComplexBatch pred = model.forward(x, Mode::train);
      double loss = 0.0;
      ComplexBatch g;
      if (regression) {
        const ComplexBatch t = train_set.targets.select_rows(idx);
        loss = loss_mse(pred, t);
        g = loss_mse_grad(pred, t);
      } else {
        std::vector<int> labels;
        labels.reserve(idx.size());
        for (std::size_t i : idx) labels.push_back(train_set.labels[i]);
        loss = loss_ce(pred, labels);
        g = loss_ce_grad(pred, labels);
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      model.backward(g, grads);
      adam_step(model.parameters(), grads, state, options.optimizer.adam);
      total += loss * static_cast<double>(e - b);
    }
    history.push_back(total / static_cast<double>(n));
    if (options.on_epoch) options.on_epoch(epoch, history.back());
  }
  return history;
}

RunSummary run_cv(const ExperimentConfig& config, const Dataset& data, const CvOptions& options) {
  config.validate();
  check_shapes(config.arch, data);
  const auto assignment = fold_assignment(data.rows(), config.folds, config.seed);

  RunSummary summary;
  summary.dataset = data.id;
  summary.model = std::string(to_string(config.arch.kind));
  summary.size = config.arch.size_label();
  summary.params = param_count(config.arch);
  summary.seed = config.seed;

  std::map<std::string, std::vector<double>> values;
  for (std::size_t k = 0; k < config.folds; ++k) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < data.rows(); ++r) (assignment[r] == k ? test_rows : train_rows).push_back(r);
    const Dataset train_set = data.subset(train_rows);
    const Dataset test_set = data.subset(test_rows);

    FoldResult fold;
    fold.fold = k;
    fold.train_size = train_rows.size();
    fold.test_size = test_rows.size();
    const std::uint64_t seed = fold_seed(config.seed, k);
    Model model = Model::init(config.arch, seed);
    TrainOptions topt;
    topt.epochs = config.epochs;
    topt.optimizer = config.optimizer;
    topt.seed = splitmix64(seed);
    if (options.on_epoch) topt.on_epoch = [&](std::size_t e, double l) { options.on_epoch(k, e, l); };
    try {
      fold.loss_trajectory = train(model, train_set, topt);
      fold.test = evaluate(model, test_set);
      if (k == 0 && options.on_fold0_model) options.on_fold0_model(model);
    } catch (const TrainingError& e) {
      fold.diverged = true;
      fold.error = e.what();
    } catch (const GradientError& e) {
      fold.diverged = true;
      fold.error = e.what();
    }
    if (!fold.diverged) {
      auto put = [&](const char* name, const std::optional<double>& v) {
        if (v) values[name].push_back(*v);
      };
      put("mse", fold.test.mse);
      put("mae", fold.test.mae);
      put("ce", fold.test.ce);
      put("acc", fold.test.acc);
    } else {
      ++summary.diverged;
    }
    summary.folds.push_back(std::move(fold));
  }
  for (const auto& [name, v] : values) summary.metrics[name] = summarize(v);
  return summary;
}

RunSummary run_cv(const ExperimentConfig& config, const CvOptions& options) {
  config.validate();
  const Dataset data = resolve_dataset(config.dataset, config.seed, config.arch.grid);
  return run_cv(config, data, options);
}

}  // namespace cvkan
