#include <cstdio>
#include <functional>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "cvkan/config.hpp"
#include "cvkan/errors.hpp"
#include "cvkan/explain.hpp"
#include "cvkan/serialize.hpp"

namespace cvkan::cli {

using nlohmann::json;

namespace {

struct Cell {
  std::string dataset;
  ModelKind kind = ModelKind::cvkan;
  std::string widths;
  NormVariant norm = NormVariant::bn_c;
  CsiluVariant csilu = CsiluVariant::complex_weight;
  OutputDomain domain = OutputDomain::complex;
  int grid_points = 8;
  std::string note;
};

Cell cvkan_cell(std::string dataset, std::string widths) {
  Cell c;
  c.dataset = std::move(dataset);
  c.widths = std::move(widths);
  return c;
}

Cell fastkan_cell(std::string dataset, std::string widths, int grid_points) {
  Cell c;
  c.dataset = std::move(dataset);
  c.kind = ModelKind::fastkan;
  c.widths = std::move(widths);
  c.norm = NormVariant::bn_real;
  c.grid_points = grid_points;
  return c;
}

Cell knot_cell(std::string widths, NormVariant norm, CsiluVariant csilu) {
  Cell c;
  c.dataset = "knots";
  c.widths = std::move(widths);
  c.norm = norm;
  c.csilu = csilu;
  c.domain = OutputDomain::real;
  return c;
}

std::vector<Cell> symbolic_cells(bool baselines) {
  std::vector<Cell> cells = {cvkan_cell("f1", "1x1"),   cvkan_cell("f1", "1x2x1"),   cvkan_cell("f2", "1x1"),
                             cvkan_cell("f2", "1x2x1"), cvkan_cell("f3", "2x2x1"),   cvkan_cell("f3", "2x4x2x1"),
                             cvkan_cell("f4", "2x1x1"), cvkan_cell("f4", "2x4x2x1")};
  if (baselines) {
    for (auto [d, w] : {std::pair{"f1", "2x2"}, {"f1", "2x3x2"}, {"f2", "2x2"}, {"f2", "2x4x4x2"}, {"f3", "4x4x2"},
                        {"f3", "4x8x4x2"}, {"f4", "4x2x2"}, {"f4", "4x6x2x3x2"}}) {
      cells.push_back(fastkan_cell(d, w, 64));
    }
  }
  return cells;
}

std::vector<Cell> physical_cells(bool baselines) {
  std::vector<Cell> cells;
  for (const char* w : {"3x1", "3x1x1", "3x3x1", "3x10x1", "3x10x3x1", "3x10x5x3x1"}) {
    cells.push_back(cvkan_cell("holography", w));
  }
  for (const char* w : {"6x1", "6x1x1", "6x3x1", "6x10x1", "6x10x3x1", "6x10x5x3x1"}) {
    cells.push_back(cvkan_cell("circuit", w));
  }
  if (baselines) {
    for (const char* w : {"6x1x2", "6x5x2", "6x10x2", "6x10x5x3x2"}) cells.push_back(fastkan_cell("holography", w, 64));
    for (const char* w : {"7x1x2", "7x5x2", "7x10x2", "7x10x5x3x2"}) cells.push_back(fastkan_cell("circuit", w, 64));
  }
  return cells;
}

std::vector<Cell> knot_cells(bool baselines) {
  std::vector<Cell> cells = {knot_cell("15x1x14", NormVariant::bn_v, CsiluVariant::complex_weight),
                             knot_cell("15x2x14", NormVariant::bn_v, CsiluVariant::complex_weight)};
  if (baselines) {
    for (int g : {8, 64}) {
      for (const char* w : {"17x1x14", "17x2x14"}) cells.push_back(fastkan_cell("knots", w, g));
    }
  }
  return cells;
}

std::vector<Cell> ablation_cells() {
  std::vector<Cell> cells;
  for (NormVariant n : {NormVariant::bn_c, NormVariant::bn_v, NormVariant::bn_r2, NormVariant::none}) {
    for (CsiluVariant v : {CsiluVariant::complex_weight, CsiluVariant::real_weight}) {
      cells.push_back(knot_cell("15x1x14", n, v));
    }
  }
  return cells;
}

struct Row {
  std::string dataset;
  std::string model;
  std::string size;
  std::string variant;
  std::size_t params = 0;
  std::optional<RunSummary> summary;
  std::string error;
};

std::string pm(const RunSummary& s, const char* metric) {
  const auto it = s.metrics.find(metric);
  if (it == s.metrics.end() || it->second.count == 0) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f ± %.3f", it->second.mean, it->second.std);
  return buf;
}

std::string render_markdown(const std::string& title, const std::vector<Row>& rows, bool classification) {
  std::ostringstream md;
  md << "# " << title << "\n\n";
  if (classification) {
    md << "| Dataset | Model | Size | Variant | # Params | Test Acc. | Test CE-Loss | Diverged |\n";
    md << "|---|---|---|---|---|---|---|---|\n";
  } else {
    md << "| Dataset | Model | Size | # Params | Test MSE | Test MAE | Diverged |\n";
    md << "|---|---|---|---|---|---|---|\n";
  }
  for (const auto& r : rows) {
    md << "| " << r.dataset << " | " << r.model << " | " << r.size << " | ";
    if (classification) md << r.variant << " | ";
    md << r.params << " | ";
    if (!r.summary) {
      md << "failed: " << r.error << " | - | - |\n";
      continue;
    }
    if (classification) {
      md << pm(*r.summary, "acc") << " | " << pm(*r.summary, "ce");
    } else {
      md << pm(*r.summary, "mse") << " | " << pm(*r.summary, "mae");
    }
    md << " | " << r.summary->diverged << " |\n";
  }
  return md.str();
}

class SuiteRunner {
 public:
  SuiteRunner(const SuiteArgs& args, std::filesystem::path dir) : args_(args), dir_(std::move(dir)) {}

  ExperimentConfig config_for(const Cell& cell) const {
    ExperimentConfig c;
    c.dataset.id = cell.dataset;
    c.dataset.samples = args_.samples.value_or(cell.dataset == "knots" ? 20000 : 5000);
    c.dataset.split_real = cell.kind == ModelKind::fastkan;
    c.arch.kind = cell.kind;
    c.arch.widths = parse_widths(cell.widths);
    c.arch.norm = cell.norm;
    c.arch.csilu = cell.csilu;
    c.arch.output_domain = cell.domain;
    c.arch.grid.points = cell.grid_points;
    c.epochs = args_.epochs.value_or(1000);
    c.folds = args_.folds.value_or(5);
    c.seed = args_.seed.value_or(0);
    if (cell.dataset == "knots") {
      if (knots_path().empty()) {
        c.dataset.id = "knots_surrogate";
        if (!args_.samples) c.dataset.samples = 5000;
      } else {
        c.dataset.path = knots_path();
      }
    }
    c.name = c.dataset.id + "_" + std::string(to_string(c.arch.kind)) + "_" + c.arch.size_label() + "_" +
             std::string(to_string(c.arch.norm)) + "_" + std::string(to_string(c.arch.csilu)) + "_g" +
             std::to_string(c.arch.grid.points);
    return c;
  }

  std::string knots_path() const {
    if (!args_.knots_csv.empty()) return args_.knots_csv;
    const char* env = std::getenv("CVKAN_KNOTS_CSV");
    return env != nullptr ? std::string(env) : std::string();
  }

  /// Runs one cell; failures are recorded in the row and the suite moves on.
  Row run(const ExperimentConfig& c, const Dataset* data, std::function<void(const Model&)> on_model = {}) {
    Row row;
    row.dataset = data != nullptr ? data->id : c.dataset.id;
    row.model = std::string(to_string(c.arch.kind));
    row.size = c.arch.size_label();
    row.variant = std::string(to_string(c.arch.norm)) + "/" +
                  (c.arch.csilu == CsiluVariant::complex_weight ? "c" : "r");
    std::fprintf(stderr, "[suite] %s\n", c.name.c_str());
    try {
      row.params = param_count(c.arch);
      CvOptions opts;
      opts.on_fold0_model = std::move(on_model);
      RunSummary s = data != nullptr ? run_cv(c, *data, opts) : run_cv(c, opts);
      write_text_file(dir_ / "cells" / (c.name + ".json"), run_summary_to_json(s).dump(2) + "\n");
      write_text_file(dir_ / "cells" / (c.name + ".manifest.json"), manifest_json(c, "suite").dump(2) + "\n");
      csv_ << run_summary_to_csv(s, false);
      row.summary = std::move(s);
    } catch (const std::exception& e) {
      row.error = e.what();
      std::fprintf(stderr, "[suite] %s failed: %s\n", c.name.c_str(), e.what());
    }
    return row;
  }

  void finish(const std::string& title, const std::vector<Row>& rows, bool classification) {
    write_text_file(dir_ / "table.md", render_markdown(title, rows, classification));
    write_text_file(dir_ / "table.csv", "dataset,model,size,fold,mse,mae,ce,acc,params,seed\n" + csv_.str());
    std::printf("%s", render_markdown(title, rows, classification).c_str());
    std::printf("\nartifacts: %s\n", dir_.string().c_str());
  }

 private:
  const SuiteArgs& args_;
  std::filesystem::path dir_;
  std::ostringstream csv_;
};

int finish_code(const std::vector<Row>& rows) {
  for (const auto& r : rows) {
    if (!r.summary) return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int cmd_suite(const SuiteArgs& args) {
  const std::string& id = args.suite;
  if (id != "symbolic" && id != "physical" && id != "knots" && id != "ablation") {
    throw ConfigError("unknown suite '" + id + "' (expected symbolic, physical, knots or ablation)");
  }
  const std::filesystem::path dir = (args.out.empty() ? default_output_dir() : args.out) / ("suite_" + id);
  SuiteRunner runner(args, dir);
  std::vector<Row> rows;

  if (id == "symbolic" || id == "physical") {
    for (const Cell& cell : id == "symbolic" ? symbolic_cells(args.with_baselines) : physical_cells(args.with_baselines)) {
      rows.push_back(runner.run(runner.config_for(cell), nullptr));
    }
    runner.finish(id == "symbolic" ? "Function fitting" : "Physical equations", rows, false);
    return finish_code(rows);
  }
  if (id == "ablation") {
    for (const Cell& cell : ablation_cells()) rows.push_back(runner.run(runner.config_for(cell), nullptr));
    runner.finish("Normalization and CSiLU ablation", rows, true);
    return finish_code(rows);
  }

  if (runner.knots_path().empty()) {
    std::fprintf(stderr, "[suite] no knot CSV given (--knots-csv or CVKAN_KNOTS_CSV); using the synthetic surrogate\n");
  }
  const auto cells = knot_cells(args.with_baselines);
  const ExperimentConfig full = runner.config_for(cells.front());
  const Dataset data = resolve_dataset(full.dataset, full.seed, full.arch.grid);
  std::optional<Model> fold0;
  rows.push_back(runner.run(full, &data, [&](const Model& m) { fold0 = m; }));
  for (std::size_t i = 1; i < cells.size(); ++i) rows.push_back(runner.run(runner.config_for(cells[i]), nullptr));

  // Relevance-driven feature pruning, retrained from scratch on the reduced inputs.
  if (fold0) {
    const RelevanceReport report = relevance(*fold0, data.features, data.id);
    json ranking = json::array();
    const auto names = data.feature_names();
    for (std::size_t f : rank_features(report)) {
      ranking.push_back({{"feature", names[f]}, {"index", f}, {"score", report.vertex_scores[0][f]}});
    }
    write_text_file(dir / "feature_ranking.json", ranking.dump(2) + "\n");
    for (auto [mode, k] : {std::pair{PruneMode::keep_top_k, std::size_t{7}}, {PruneMode::keep_top_k, std::size_t{3}},
                           {PruneMode::drop_top_k, std::size_t{7}}, {PruneMode::drop_top_k, std::size_t{3}}}) {
      Dataset pruned = prune_features(data, report, mode, k);
      pruned.id = data.id + (mode == PruneMode::keep_top_k ? "_top" : "_without_top") + std::to_string(k);
      ExperimentConfig c = full;
      c.arch.widths.front() = pruned.feature_count();
      c.name = full.name + "_" + pruned.id;
      rows.push_back(runner.run(c, &pruned));
    }
  }
  runner.finish("Knot classification", rows, true);
  return finish_code(rows);
}

}  // namespace cvkan::cli
