#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cvkan/training.hpp"

namespace cvkan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> samples;
};

/// Everything needed to rerun: tool version, config hash, seed and the resolved config.
nlohmann::json manifest_json(const ExperimentConfig& config, const std::string& command);

/// CVKAN_OUTPUT_DIR when set, otherwise ./runs.
std::filesystem::path default_output_dir();

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  Overrides overrides;
  bool quiet = false;
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
  std::filesystem::path model;
  std::filesystem::path config;
  Overrides overrides;
};
int cmd_eval(const EvalArgs& args);

struct ParamsArgs {
  std::filesystem::path config;
  std::string widths;
  std::string kind = "cvkan";
  std::string norm;
  std::string csilu = "complex_weight";
  std::string output_domain = "complex";
  int grid_points = 8;
};
int cmd_params(const ParamsArgs& args);

struct ExportVizArgs {
  std::filesystem::path model;
  std::filesystem::path config;
  std::filesystem::path out;
  std::size_t resolution = 64;
  std::size_t samples = 0;
  Overrides overrides;
};
int cmd_export_viz(const ExportVizArgs& args);

struct SuiteArgs {
  std::string suite;
  std::filesystem::path out;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> folds;
  std::string knots_csv;
  bool with_baselines = false;
};
int cmd_suite(const SuiteArgs& args);

}  // namespace cvkan::cli
