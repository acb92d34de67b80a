#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "cvkan/errors.hpp"
#include "cvkan/version.hpp"

using namespace cvkan;
using namespace cvkan::cli;

namespace {

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the experiment seed");
  cmd->add_option("--epochs", o.epochs, "Override the number of epochs");
  cmd->add_option("--batch-size", o.batch_size, "Override the batch size");
  cmd->add_option("--samples", o.samples, "Override the dataset size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex-valued Kolmogorov-Arnold networks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Cross-validated training run");
  train_cmd->add_option("--config", train.config, "Experiment config (JSON)")->required();
  train_cmd->add_option("--out", train.out, "Output directory (default: $CVKAN_OUTPUT_DIR or ./runs)");
  train_cmd->add_flag("--quiet", train.quiet, "No per-epoch progress");
  add_overrides(train_cmd, train.overrides);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on the config's dataset");
  eval_cmd->add_option("--model", eval.model, "Model file")->required();
  eval_cmd->add_option("--config", eval.config, "Experiment config (JSON)")->required();
  add_overrides(eval_cmd, eval.overrides);

  ParamsArgs params;
  auto* params_cmd = app.add_subcommand("params", "Print the trainable parameter count");
  params_cmd->add_option("--config", params.config, "Experiment config (JSON)");
  params_cmd->add_option("--widths", params.widths, "Layer widths, e.g. 3x10x1");
  params_cmd->add_option("--kind", params.kind, "cvkan | fastkan");
  params_cmd->add_option("--norm", params.norm, "none | bn_c | bn_v | bn_r2 | bn_real");
  params_cmd->add_option("--csilu", params.csilu, "complex_weight | real_weight");
  params_cmd->add_option("--output-domain", params.output_domain, "complex | real");
  params_cmd->add_option("--grid-points", params.grid_points, "Grid points per axis");

  ExportVizArgs viz;
  auto* viz_cmd = app.add_subcommand("export-viz", "Write the viewer document for a trained model");
  viz_cmd->add_option("--model", viz.model, "Model file")->required();
  viz_cmd->add_option("--config", viz.config, "Experiment config naming the relevance dataset")->required();
  viz_cmd->add_option("--resolution", viz.resolution, "Surface lattice size per axis");
  viz_cmd->add_option("--relevance-samples", viz.samples, "Use only the first N rows for relevance");
  viz_cmd->add_option("--out", viz.out, "Output file");
  add_overrides(viz_cmd, viz.overrides);

  SuiteArgs suite;
  auto* suite_cmd = app.add_subcommand("suite", "Run an experiment sweep and write its table");
  suite_cmd->add_option("suite", suite.suite, "symbolic | physical | knots | ablation")->required();
  suite_cmd->add_option("--out", suite.out, "Output directory");
  suite_cmd->add_option("--epochs", suite.epochs, "Epochs per cell");
  suite_cmd->add_option("--samples", suite.samples, "Samples per dataset");
  suite_cmd->add_option("--seed", suite.seed, "Master seed");
  suite_cmd->add_option("--folds", suite.folds, "Cross-validation folds");
  suite_cmd->add_option("--knots-csv", suite.knots_csv, "Knot dataset CSV (or $CVKAN_KNOTS_CSV)");
  suite_cmd->add_flag("--with-baselines", suite.with_baselines, "Also run the FastKAN rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*eval_cmd) return cmd_eval(eval);
    if (*params_cmd) return cmd_params(params);
    if (*viz_cmd) return cmd_export_viz(viz);
    if (*suite_cmd) return cmd_suite(suite);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
