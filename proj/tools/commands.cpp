#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <json.hpp>

#include "cvkan/config.hpp"
#include "cvkan/errors.hpp"
#include "cvkan/explain.hpp"
#include "cvkan/serialize.hpp"
#include "cvkan/training.hpp"
#include "cvkan/version.hpp"

namespace cvkan::cli {

using nlohmann::json;

std::filesystem::path default_output_dir() {
  const char* env = std::getenv("CVKAN_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? std::filesystem::path(env) : std::filesystem::path("runs");
}

namespace {

ExperimentConfig load_with_overrides(const std::filesystem::path& path, const Overrides& o) {
  ExperimentConfig c = load_experiment_config(path);
  if (o.seed) c.seed = *o.seed;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.batch_size) c.optimizer.batch_size = *o.batch_size;
  if (o.samples) c.dataset.samples = *o.samples;
  c.validate();
  return c;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string run_name(const ExperimentConfig& c, const std::filesystem::path& config_path) {
  return c.name.empty() ? config_path.stem().string() : c.name;
}

}  // namespace

json manifest_json(const ExperimentConfig& c, const std::string& command) {
  return {{"tool", "cvkan"},
          {"version", kVersion},
          {"command", command},
          {"config_hash", hex64(config_hash(c))},
          {"seed", c.seed},
          {"config", experiment_config_to_json(c)}};
}

int cmd_train(const TrainArgs& args) {
  const ExperimentConfig c = load_with_overrides(args.config, args.overrides);
  const std::filesystem::path dir = (args.out.empty() ? default_output_dir() : args.out) / run_name(c, args.config);
  CvOptions opts;
  std::optional<Model> fold0;
  opts.on_fold0_model = [&](const Model& m) { fold0 = m; };
  if (!args.quiet) {
    opts.on_epoch = [&](std::size_t fold, std::size_t epoch, double loss) {
      if ((epoch + 1) % 100 == 0 || epoch + 1 == c.epochs) {
        std::fprintf(stderr, "fold %zu epoch %zu loss %.6g\n", fold, epoch + 1, loss);
      }
    };
  }
  const RunSummary s = run_cv(c, opts);
  write_text_file(dir / "manifest.json", manifest_json(c, "train").dump(2) + "\n");
  write_text_file(dir / "summary.json", run_summary_to_json(s).dump(2) + "\n");
  write_text_file(dir / "folds.csv", run_summary_to_csv(s));
  if (fold0) save_model(*fold0, dir / "model_fold0.json");

  std::printf("%s %s %s params=%zu", s.dataset.c_str(), s.model.c_str(), s.size.c_str(), s.params);
  for (const auto& [name, m] : s.metrics) std::printf(" %s=%.6g+-%.6g", name.c_str(), m.mean, m.std);
  std::printf(" diverged=%zu\nartifacts: %s\n", s.diverged, dir.string().c_str());
  return s.diverged == s.folds.size() ? kExitRuntime : kExitOk;
}

int cmd_eval(const EvalArgs& args) {
  const ExperimentConfig c = load_with_overrides(args.config, args.overrides);
  const Model model = load_model(args.model);
  if (model.architecture() != c.arch) throw ConfigError("model architecture does not match the config");
  const Dataset d = resolve_dataset(c.dataset, c.seed, c.arch.grid);
  const Metrics m = evaluate(model, d);
  json out = {{"dataset", d.id}, {"rows", d.rows()}};
  if (m.mse) out["mse"] = *m.mse;
  if (m.mae) out["mae"] = *m.mae;
  if (m.ce) out["ce"] = *m.ce;
  if (m.acc) out["acc"] = *m.acc;
  std::printf("%s\n", out.dump(2).c_str());
  return kExitOk;
}

int cmd_params(const ParamsArgs& args) {
  Architecture arch;
  if (!args.config.empty()) {
    arch = load_experiment_config(args.config).arch;
  } else {
    if (args.widths.empty()) throw ConfigError("params needs --config or --widths");
    arch.kind = parse_model_kind(args.kind);
    arch.widths = parse_widths(args.widths);
    arch.norm = args.norm.empty() ? (arch.kind == ModelKind::fastkan ? NormVariant::bn_real : NormVariant::bn_c)
                                  : parse_norm_variant(args.norm);
    arch.csilu = parse_csilu_variant(args.csilu);
    arch.output_domain = parse_output_domain(args.output_domain);
    arch.grid.points = args.grid_points;
    arch.validate();
  }
  std::printf("%zu\n", param_count(arch));
  return kExitOk;
}

int cmd_export_viz(const ExportVizArgs& args) {
  const ExperimentConfig c = load_with_overrides(args.config, args.overrides);
  const Model model = load_model(args.model);
  if (model.architecture().widths != c.arch.widths) throw ConfigError("model widths do not match the config");
  Dataset d = resolve_dataset(c.dataset, c.seed, c.arch.grid);
  if (args.samples > 0 && args.samples < d.rows()) {
    std::vector<std::size_t> rows(args.samples);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    d = d.subset(rows);
  }
  const RelevanceReport report = relevance(model, d.features, d.id);
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const std::filesystem::path out = args.out.empty() ? default_output_dir() / "viz.json" : args.out;
  export_viz(model, report, args.resolution, d.feature_names(), out);
  std::printf("wrote %s\n", out.string().c_str());
  return kExitOk;
}

}  // namespace cvkan::cli
