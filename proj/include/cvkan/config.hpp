#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "cvkan/training.hpp"

namespace cvkan {

/// Strict parse: unknown keys, wrong types and invalid values raise ConfigError.
///
/// {
///   "name": "...",
///   "dataset": {"id": "f1", "samples": 5000, "seed": 1, "path": "...", "split_real": false,
///               "features": [0, 3]},
///   "model": {"kind": "cvkan", "widths": [1, 1], "norm": "bn_c", "csilu": "complex_weight",
///             "output_domain": "complex",
///             "grid": {"lo": -2, "hi": 2, "points": 8, "bandwidth": 1.0}},
///   "optimizer": {"lr": 1e-3, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8, "batch_size": 256},
///   "epochs": 1000, "folds": 5, "seed": 0
/// }
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

/// 64-bit FNV-1a over the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& config);

nlohmann::json run_summary_to_json(const RunSummary& summary);
/// Header: dataset,model,size,fold,mse,mae,ce,acc,params,seed
std::string run_summary_to_csv(const RunSummary& summary, bool header = true);

}  // namespace cvkan
