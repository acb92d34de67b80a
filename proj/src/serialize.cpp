#include "cvkan/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cvkan/errors.hpp"

namespace cvkan {

using nlohmann::json;

json architecture_to_json(const Architecture& arch) {
  return {{"kind", to_string(arch.kind)},
          {"widths", arch.widths},
          {"grid", {{"lo", arch.grid.lo}, {"hi", arch.grid.hi}, {"points", arch.grid.points},
                    {"bandwidth", arch.grid.bandwidth}}},
          {"norm", to_string(arch.norm)},
          {"csilu", to_string(arch.csilu)},
          {"output_domain", to_string(arch.output_domain)}};
}

Architecture architecture_from_json(const json& j) {
  try {
    Architecture a;
    a.kind = parse_model_kind(j.at("kind").get<std::string>());
    a.widths = j.at("widths").get<std::vector<std::size_t>>();
    const json& g = j.at("grid");
    a.grid.lo = g.at("lo").get<double>();
    a.grid.hi = g.at("hi").get<double>();
    a.grid.points = g.at("points").get<int>();
    a.grid.bandwidth = g.at("bandwidth").get<double>();
    a.norm = parse_norm_variant(j.at("norm").get<std::string>());
    a.csilu = parse_csilu_variant(j.at("csilu").get<std::string>());
    a.output_domain = parse_output_domain(j.at("output_domain").get<std::string>());
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed architecture: ") + e.what());
  }
}

namespace {

json layout_to_json(const Model& model) {
  json out = json::array();
  for (const auto& e : model.layout()) {
    out.push_back({{"kind", e.kind}, {"layer", e.layer}, {"offset", e.offset}, {"size", e.size}});
  }
  return out;
}

json running_to_json(const Model& model) {
  json out = json::array();
  for (const auto& norm : model.norms()) {
    json layer = json::array();
    for (const auto& s : norm.running()) {
      layer.push_back({{"mean", {s.mean.real(), s.mean.imag()}},
                       {"cov_rr", s.cov_rr},
                       {"cov_ri", s.cov_ri},
                       {"cov_ii", s.cov_ii},
                       {"var", s.var}});
    }
    out.push_back(std::move(layer));
  }
  return out;
}

void running_from_json(const json& j, Model& model) {
  auto norms = model.norms();
  if (!j.is_array() || j.size() != norms.size()) throw ConfigError("running statistics do not match the model");
  for (std::size_t l = 0; l < norms.size(); ++l) {
    auto stats = norms[l].running();
    if (!j[l].is_array() || j[l].size() != stats.size()) throw ConfigError("running statistics do not match the model");
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const json& s = j[l][i];
      const auto mean = s.at("mean").get<std::vector<double>>();
      if (mean.size() != 2) throw ConfigError("running mean must be a [re, im] pair");
      stats[i].mean = {mean[0], mean[1]};
      stats[i].cov_rr = s.at("cov_rr").get<double>();
      stats[i].cov_ri = s.at("cov_ri").get<double>();
      stats[i].cov_ii = s.at("cov_ii").get<double>();
      stats[i].var = s.at("var").get<double>();
    }
  }
}

}  // namespace

json model_to_json(const Model& model) {
  const std::vector<double> params(model.parameters().begin(), model.parameters().end());
  for (double v : params) {
    if (!std::isfinite(v)) throw IoError("cannot serialize a model with non-finite parameters");
  }
  const NormOptions opts = model.norms().empty() ? NormOptions{} : model.norms().front().options();
  return {{"format", "cvkan-model"},
          {"version", kModelFormatVersion},
          {"architecture", architecture_to_json(model.architecture())},
          {"parameters", params},
          {"layout", layout_to_json(model)},
          {"norm_options", {{"momentum", opts.momentum}, {"epsilon", opts.epsilon}}},
          {"running_stats", running_to_json(model)}};
}

Model model_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", std::string()) != "cvkan-model") {
      throw ConfigError("not a model document");
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ConfigError("unsupported model format version " + std::to_string(version));
    }
    const Architecture arch = architecture_from_json(j.at("architecture"));
    NormOptions opts;
    if (j.contains("norm_options")) {
      opts.momentum = j["norm_options"].at("momentum").get<double>();
      opts.epsilon = j["norm_options"].at("epsilon").get<double>();
    }
    Model m = Model::from_parameters(arch, j.at("parameters").get<std::vector<double>>(), opts);
    if (j.contains("running_stats")) running_from_json(j["running_stats"], m);
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model).dump(1) + "\n");
}

Model load_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace cvkan
