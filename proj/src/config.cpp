#include "cvkan/config.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <sstream>

#include "cvkan/errors.hpp"
#include "cvkan/serialize.hpp"

namespace cvkan {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || item.key() == key;
    if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

double get_double(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(where + "." + key + " must be a non-negative integer");
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::uint64_t get_element(const json& arr, std::size_t i, const std::string& where) {
  const json& v = arr.at(i);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(where + "[" + std::to_string(i) + "] must be a non-negative integer");
}

std::vector<std::size_t> get_index_list(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be an array");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_element(v, i, where + "." + key));
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig c;
  require_object(j, "config", {"name", "dataset", "model", "optimizer", "epochs", "folds", "seed"});
  if (!j.contains("dataset")) throw ConfigError("config needs a 'dataset' section");
  if (!j.contains("model")) throw ConfigError("config needs a 'model' section");

  if (j.contains("name")) c.name = get_string(j, "name", "config");
  if (j.contains("epochs")) c.epochs = get_unsigned(j, "epochs", "config");
  if (j.contains("folds")) c.folds = get_unsigned(j, "folds", "config");
  if (j.contains("seed")) c.seed = get_unsigned(j, "seed", "config");

  const json& d = j["dataset"];
  require_object(d, "dataset", {"id", "samples", "seed", "path", "split_real", "features"});
  if (!d.contains("id")) throw ConfigError("dataset needs an 'id'");
  c.dataset.id = get_string(d, "id", "dataset");
  if (d.contains("samples")) c.dataset.samples = get_unsigned(d, "samples", "dataset");
  if (d.contains("seed")) c.dataset.seed = get_unsigned(d, "seed", "dataset");
  if (d.contains("path")) c.dataset.path = get_string(d, "path", "dataset");
  if (d.contains("split_real")) c.dataset.split_real = get_bool(d, "split_real", "dataset");
  if (d.contains("features")) c.dataset.features = get_index_list(d, "features", "dataset");

  const json& m = j["model"];
  require_object(m, "model", {"kind", "widths", "norm", "csilu", "output_domain", "grid"});
  if (!m.contains("widths")) throw ConfigError("model needs 'widths'");
  if (m.contains("kind")) c.arch.kind = parse_model_kind(get_string(m, "kind", "model"));
  if (m["widths"].is_string()) {
    c.arch.widths = parse_widths(m["widths"].get<std::string>());
  } else {
    c.arch.widths = get_index_list(m, "widths", "model");
  }
  if (c.arch.kind == ModelKind::fastkan) c.arch.norm = NormVariant::bn_real;
  if (m.contains("norm")) c.arch.norm = parse_norm_variant(get_string(m, "norm", "model"));
  if (m.contains("csilu")) c.arch.csilu = parse_csilu_variant(get_string(m, "csilu", "model"));
  if (m.contains("output_domain")) c.arch.output_domain = parse_output_domain(get_string(m, "output_domain", "model"));
  if (m.contains("grid")) {
    const json& g = m["grid"];
    require_object(g, "model.grid", {"lo", "hi", "points", "bandwidth"});
    if (g.contains("lo")) c.arch.grid.lo = get_double(g, "lo", "model.grid");
    if (g.contains("hi")) c.arch.grid.hi = get_double(g, "hi", "model.grid");
    if (g.contains("points")) c.arch.grid.points = static_cast<int>(get_unsigned(g, "points", "model.grid"));
    if (g.contains("bandwidth")) c.arch.grid.bandwidth = get_double(g, "bandwidth", "model.grid");
  }

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    require_object(o, "optimizer", {"lr", "beta1", "beta2", "eps", "batch_size"});
    if (o.contains("lr")) c.optimizer.adam.lr = get_double(o, "lr", "optimizer");
    if (o.contains("beta1")) c.optimizer.adam.beta1 = get_double(o, "beta1", "optimizer");
    if (o.contains("beta2")) c.optimizer.adam.beta2 = get_double(o, "beta2", "optimizer");
    if (o.contains("eps")) c.optimizer.adam.eps = get_double(o, "eps", "optimizer");
    if (o.contains("batch_size")) c.optimizer.batch_size = get_unsigned(o, "batch_size", "optimizer");
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file '" + path.string() + "' not found");
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json d = {{"id", c.dataset.id}, {"samples", c.dataset.samples}, {"split_real", c.dataset.split_real}};
  if (c.dataset.seed) d["seed"] = *c.dataset.seed;
  if (!c.dataset.path.empty()) d["path"] = c.dataset.path;
  if (!c.dataset.features.empty()) d["features"] = c.dataset.features;
  json model = architecture_to_json(c.arch);
  json out = {{"dataset", d},
              {"model", model},
              {"optimizer",
               {{"lr", c.optimizer.adam.lr},
                {"beta1", c.optimizer.adam.beta1},
                {"beta2", c.optimizer.adam.beta2},
                {"eps", c.optimizer.adam.eps},
                {"batch_size", c.optimizer.batch_size}}},
              {"epochs", c.epochs},
              {"folds", c.folds},
              {"seed", c.seed}};
  if (!c.name.empty()) out["name"] = c.name;
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string text = experiment_config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

json run_summary_to_json(const RunSummary& s) {
  json folds = json::array();
  for (const auto& f : s.folds) {
    json jf = {{"fold", f.fold}, {"train_size", f.train_size}, {"test_size", f.test_size},
               {"diverged", f.diverged}, {"loss_trajectory", f.loss_trajectory}};
    if (f.diverged) jf["error"] = f.error;
    if (f.test.mse) jf["mse"] = *f.test.mse;
    if (f.test.mae) jf["mae"] = *f.test.mae;
    if (f.test.ce) jf["ce"] = *f.test.ce;
    if (f.test.acc) jf["acc"] = *f.test.acc;
    folds.push_back(std::move(jf));
  }
  json metrics = json::object();
  for (const auto& [name, m] : s.metrics) metrics[name] = {{"mean", m.mean}, {"std", m.std}, {"count", m.count}};
  return {{"dataset", s.dataset}, {"model", s.model},   {"size", s.size},         {"params", s.params},
          {"seed", s.seed},       {"folds", folds},     {"metrics", metrics},     {"diverged", s.diverged}};
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

}  // namespace

std::string run_summary_to_csv(const RunSummary& s, bool header) {
  std::ostringstream out;
  if (header) out << "dataset,model,size,fold,mse,mae,ce,acc,params,seed\n";
  auto row = [&](const std::string& fold, const Metrics& m) {
    out << s.dataset << ',' << s.model << ',' << s.size << ',' << fold << ',' << fmt(m.mse) << ',' << fmt(m.mae)
        << ',' << fmt(m.ce) << ',' << fmt(m.acc) << ',' << s.params << ',' << s.seed << '\n';
  };
  for (const auto& f : s.folds) row(f.diverged ? std::to_string(f.fold) + "(diverged)" : std::to_string(f.fold), f.test);
  Metrics mean, sd;
  auto pick = [&](const char* name, std::optional<double>& m, std::optional<double>& d) {
    const auto it = s.metrics.find(name);
    if (it != s.metrics.end() && it->second.count > 0) {
      m = it->second.mean;
      d = it->second.std;
    }
  };
  pick("mse", mean.mse, sd.mse);
  pick("mae", mean.mae, sd.mae);
  pick("ce", mean.ce, sd.ce);
  pick("acc", mean.acc, sd.acc);
  row("mean", mean);
  row("std", sd);
  return out.str();
}

}  // namespace cvkan
