#include "cvkan/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "cvkan/errors.hpp"
#include "cvkan/serialize.hpp"

namespace cvkan {

using nlohmann::json;

double complex_std(std::span<const Complex> values) {
  if (values.size() < 2) throw StatisticsError("complex_std needs at least two values");
  Complex mean{0.0, 0.0};
  for (Complex z : values) mean += z;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (Complex z : values) ss += complex_abs2(z - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {

std::vector<double> column_std(const ComplexBatch& b) {
  std::vector<double> out;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    const auto col = b.column(c);
    out.push_back(complex_std(col));
  }
  return out;
}

}  // namespace

RelevanceReport relevance(const Model& model, const ComplexBatch& inputs, std::string dataset_id) {
  const auto& widths = model.architecture().widths;
  if (inputs.cols() != widths.front()) throw ShapeError("relevance inputs do not match the model input width");
  if (inputs.rows() < 2) throw StatisticsError("relevance needs at least two samples");
  const Model::Trace t = model.trace(inputs);
  const std::size_t depth = model.depth();
  const std::size_t n = inputs.rows();

  RelevanceReport r;
  r.dataset_id = std::move(dataset_id);
  r.samples = n;
  r.widths = widths;
  r.edge_scores.resize(depth);
  r.edge_std.resize(depth);
  r.vertex_scores.resize(depth + 1);
  r.vertex_std.resize(depth + 1);

  std::vector<Complex> series(n);
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    r.edge_std[l].assign(in * out, 0.0);
    for (std::size_t q = 0; q < out; ++q) {
      for (std::size_t p = 0; p < in; ++p) {
        for (std::size_t s = 0; s < n; ++s) series[s] = t.edges[l][(s * out + q) * in + p];
        r.edge_std[l][q * in + p] = complex_std(series);
      }
    }
    r.vertex_std[l] = column_std(t.inputs[l]);
  }
  r.vertex_std[depth] = column_std(t.sums[depth - 1]);

  r.vertex_scores[depth].assign(widths[depth], 1.0);
  for (std::size_t l = depth; l-- > 0;) {
    const std::size_t in = widths[l], out = widths[l + 1];
    r.edge_scores[l].assign(in * out, 0.0);
    r.vertex_scores[l].assign(in, 0.0);
    for (std::size_t q = 0; q < out; ++q) {
      const double head = r.vertex_scores[l + 1][q];
      double total = 0.0;
      for (std::size_t p = 0; p < in; ++p) total += r.edge_std[l][q * in + p];
      for (std::size_t p = 0; p < in; ++p) {
        double share;
        if (total > 0.0) {
          share = r.edge_std[l][q * in + p] / total;
        } else {
          share = 1.0 / static_cast<double>(in);
        }
        r.edge_scores[l][q * in + p] = head * share;
      }
      if (!(total > 0.0)) {
        r.warnings.push_back("all incoming edges of vertex (" + std::to_string(l + 1) + ", " + std::to_string(q) +
                             ") are constant; relevance split uniformly");
      }
    }
    for (std::size_t p = 0; p < in; ++p) {
      for (std::size_t q = 0; q < out; ++q) r.vertex_scores[l][p] += r.edge_scores[l][q * in + p];
    }
  }
  return r;
}

std::vector<std::size_t> rank_features(const RelevanceReport& report) {
  const auto& scores = report.vertex_scores.front();
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

Dataset prune_features(const Dataset& data, const RelevanceReport& report, PruneMode mode, std::size_t k) {
  const std::size_t n = data.feature_count();
  if (report.vertex_scores.empty() || report.vertex_scores.front().size() != n) {
    throw ShapeError("relevance report does not match the dataset features");
  }
  if (k > n) throw ConfigError("cannot select " + std::to_string(k) + " of " + std::to_string(n) + " features");
  const auto ranked = rank_features(report);
  std::vector<std::size_t> keep;
  if (mode == PruneMode::keep_top_k) {
    keep.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    keep.assign(ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
  }
  if (keep.empty()) throw ConfigError("pruning would remove every feature");
  std::sort(keep.begin(), keep.end());
  return data.select_features(keep);
}

double phase_of(Complex z) {
  const double a = std::atan2(z.imag(), z.real());
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

EdgeSurface sample_edge_surface(const EdgeFunction& edge, std::size_t resolution) {
  if (resolution < 2) throw ConfigError("surface resolution must be at least 2");
  edge.validate();
  EdgeSurface s;
  s.resolution = resolution;
  s.magnitude.resize(resolution * resolution);
  s.phase.resize(resolution * resolution);
  const double lo = edge.grid.lo, hi = edge.grid.hi;
  const double last = static_cast<double>(resolution - 1);
  for (std::size_t u = 0; u < resolution; ++u) {
    const double re = lo + (hi - lo) * static_cast<double>(u) / last;
    for (std::size_t v = 0; v < resolution; ++v) {
      const double im = lo + (hi - lo) * static_cast<double>(v) / last;
      const Complex f = edge_forward({re, im}, edge);
      s.magnitude[u * resolution + v] = std::abs(f);
      s.phase[u * resolution + v] = phase_of(f);
    }
  }
  return s;
}

VizDocument build_viz(const Model& model, const RelevanceReport& report, std::size_t resolution,
                      std::vector<std::string> feature_names) {
  if (model.architecture().kind != ModelKind::cvkan) throw ConfigError("viewer export supports CVKAN models only");
  if (report.widths != model.architecture().widths) throw ShapeError("relevance report does not match the model");
  if (feature_names.size() != model.architecture().widths.front()) {
    throw ShapeError("expected one feature name per model input");
  }
  VizDocument doc{model, report, {}, std::move(feature_names)};
  const auto& widths = model.architecture().widths;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    for (std::size_t q = 0; q < widths[l + 1]; ++q) {
      for (std::size_t p = 0; p < widths[l]; ++p) {
        EdgeSurface s = sample_edge_surface(model.edge(l, q, p), resolution);
        s.l = l;
        s.q = q;
        s.p = p;
        doc.surfaces.push_back(std::move(s));
      }
    }
  }
  return doc;
}

std::string viz_to_json_text(const VizDocument& doc) {
  const json m = model_to_json(doc.model);
  const json& arch = m["architecture"];
  const RelevanceReport& r = doc.relevance;
  json edges = json::array();
  for (std::size_t l = 0; l < r.edge_scores.size(); ++l) {
    for (std::size_t q = 0; q < r.widths[l + 1]; ++q) {
      for (std::size_t p = 0; p < r.widths[l]; ++p) {
        const std::size_t i = q * r.widths[l] + p;
        edges.push_back({{"l", l}, {"q", q}, {"p", p}, {"score", r.edge_scores[l][i]}, {"std", r.edge_std[l][i]}});
      }
    }
  }
  json vertices = json::array();
  for (std::size_t l = 0; l < r.vertex_scores.size(); ++l) {
    for (std::size_t i = 0; i < r.vertex_scores[l].size(); ++i) {
      vertices.push_back({{"l", l}, {"i", i}, {"score", r.vertex_scores[l][i]}, {"std", r.vertex_std[l][i]}});
    }
  }
  json surfaces = json::array();
  for (const auto& s : doc.surfaces) {
    surfaces.push_back({{"l", s.l}, {"q", s.q}, {"p", s.p}, {"resolution", s.resolution},
                        {"magnitude", s.magnitude}, {"phase", s.phase}});
  }
  json out = {{"version", kVizFormatVersion},
              {"widths", arch["widths"]},
              {"output_domain", arch["output_domain"]},
              {"grid", arch["grid"]},
              {"norm_variant", arch["norm"]},
              {"csilu_variant", arch["csilu"]},
              {"parameters", {{"values", m["parameters"]}, {"layout", m["layout"]}}},
              {"norm_options", m["norm_options"]},
              {"running_stats", m["running_stats"]},
              {"relevance",
               {{"dataset", r.dataset_id},
                {"samples", r.samples},
                {"edges", edges},
                {"vertices", vertices},
                {"warnings", r.warnings}}},
              {"surfaces", surfaces},
              {"feature_names", doc.feature_names}};
  return out.dump() + "\n";
}

namespace {

void check(std::vector<std::string>& problems, bool ok, const std::string& message) {
  if (!ok) problems.push_back(message);
}

}  // namespace

std::vector<std::string> validate_viz_json_text(const std::string& text) {
  std::vector<std::string> problems;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    return {std::string("not valid JSON: ") + e.what()};
  }
  if (!j.is_object()) return {"document is not an object"};
  for (const char* key : {"version", "widths", "output_domain", "grid", "norm_variant", "csilu_variant", "parameters",
                          "relevance", "surfaces", "feature_names"}) {
    check(problems, j.contains(key), std::string("missing field '") + key + "'");
  }
  if (!problems.empty()) return problems;
  check(problems, j["version"] == kVizFormatVersion, "unsupported version");
  const json& w = j["widths"];
  bool widths_ok = w.is_array() && w.size() >= 2;
  for (const auto& v : w) widths_ok = widths_ok && v.is_number_unsigned() && v.get<std::size_t>() > 0;
  check(problems, widths_ok, "widths must be an array of at least two positive integers");
  if (!widths_ok) return problems;
  const auto widths = w.get<std::vector<std::size_t>>();
  std::size_t edge_count = 0, vertex_count = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) edge_count += widths[l] * widths[l + 1];
  for (std::size_t x : widths) vertex_count += x;

  check(problems, j["output_domain"] == "complex" || j["output_domain"] == "real", "invalid output_domain");
  const json& g = j["grid"];
  check(problems, g.is_object() && g.contains("lo") && g.contains("hi") && g.contains("points") && g.contains("bandwidth"),
        "grid needs lo, hi, points, bandwidth");
  const json& params = j["parameters"];
  if (params.is_object() && params.contains("values") && params.contains("layout") && params["values"].is_array() &&
      params["layout"].is_array()) {
    std::size_t covered = 0;
    for (const auto& e : params["layout"]) {
      const bool ok = e.is_object() && e.contains("kind") && e.contains("layer") && e.contains("offset") &&
                      e.contains("size") && e["offset"].is_number_unsigned() && e["size"].is_number_unsigned();
      check(problems, ok, "malformed layout entry");
      if (!ok) continue;
      check(problems, e["offset"].get<std::size_t>() == covered, "layout entries must be contiguous");
      covered = e["offset"].get<std::size_t>() + e["size"].get<std::size_t>();
    }
    check(problems, covered == params["values"].size(), "layout does not cover the parameter vector");
    for (const auto& v : params["values"]) {
      if (!v.is_number()) {
        problems.push_back("parameters must be numbers");
        break;
      }
    }
  } else {
    problems.push_back("parameters needs 'values' and 'layout' arrays");
  }
  const json& rel = j["relevance"];
  if (rel.is_object() && rel.contains("edges") && rel.contains("vertices") && rel["edges"].is_array() &&
      rel["vertices"].is_array()) {
    check(problems, rel["edges"].size() == edge_count, "relevance.edges has the wrong length");
    check(problems, rel["vertices"].size() == vertex_count, "relevance.vertices has the wrong length");
    for (const auto& e : rel["edges"]) {
      const bool ok = e.is_object() && e.contains("l") && e.contains("q") && e.contains("p") && e.contains("score") &&
                      e["score"].is_number() && e["score"].get<double>() >= 0.0;
      check(problems, ok, "malformed relevance edge entry");
      if (!ok) break;
    }
  } else {
    problems.push_back("relevance needs 'edges' and 'vertices' arrays");
  }
  const json& surfaces = j["surfaces"];
  if (surfaces.is_array()) {
    check(problems, surfaces.size() == edge_count, "expected one surface per edge");
    for (const auto& s : surfaces) {
      const bool ok = s.is_object() && s.contains("l") && s.contains("q") && s.contains("p") &&
                      s.contains("resolution") && s.contains("magnitude") && s.contains("phase") &&
                      s["resolution"].is_number_unsigned() && s["magnitude"].is_array() && s["phase"].is_array();
      check(problems, ok, "malformed surface entry");
      if (!ok) break;
      const std::size_t r = s["resolution"].get<std::size_t>();
      check(problems, s["magnitude"].size() == r * r && s["phase"].size() == r * r,
            "surface arrays must hold resolution^2 values");
      for (const auto& ph : s["phase"]) {
        if (!ph.is_number() || ph.get<double>() <= -std::numbers::pi || ph.get<double>() > std::numbers::pi) {
          problems.push_back("phase outside (-pi, pi]");
          break;
        }
      }
    }
  } else {
    problems.push_back("surfaces must be an array");
  }
  const json& names = j["feature_names"];
  check(problems, names.is_array() && names.size() == widths.front(), "feature_names must list every input");
  return problems;
}

VizDocument viz_from_json_text(const std::string& text) {
  const auto problems = validate_viz_json_text(text);
  if (!problems.empty()) throw ConfigError("invalid viewer document: " + problems.front());
  try {
    const json j = json::parse(text);
    json m = {{"format", "cvkan-model"},
              {"version", kModelFormatVersion},
              {"architecture",
               {{"kind", "cvkan"},
                {"widths", j["widths"]},
                {"grid", j["grid"]},
                {"norm", j["norm_variant"]},
                {"csilu", j["csilu_variant"]},
                {"output_domain", j["output_domain"]}}},
              {"parameters", j["parameters"]["values"]}};
    if (j.contains("norm_options")) m["norm_options"] = j["norm_options"];
    if (j.contains("running_stats")) m["running_stats"] = j["running_stats"];
    Model model = model_from_json(m);

    RelevanceReport r;
    const json& rel = j["relevance"];
    r.dataset_id = rel.value("dataset", std::string());
    r.samples = rel.value("samples", std::size_t{0});
    r.widths = j["widths"].get<std::vector<std::size_t>>();
    if (rel.contains("warnings")) r.warnings = rel["warnings"].get<std::vector<std::string>>();
    const std::size_t depth = r.widths.size() - 1;
    r.edge_scores.resize(depth);
    r.edge_std.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
      r.edge_scores[l].assign(r.widths[l] * r.widths[l + 1], 0.0);
      r.edge_std[l].assign(r.widths[l] * r.widths[l + 1], 0.0);
    }
    r.vertex_scores.resize(depth + 1);
    r.vertex_std.resize(depth + 1);
    for (std::size_t l = 0; l <= depth; ++l) {
      r.vertex_scores[l].assign(r.widths[l], 0.0);
      r.vertex_std[l].assign(r.widths[l], 0.0);
    }
    for (const auto& e : rel["edges"]) {
      const auto l = e.at("l").get<std::size_t>(), q = e.at("q").get<std::size_t>(), p = e.at("p").get<std::size_t>();
      if (l >= depth || q >= r.widths[l + 1] || p >= r.widths[l]) throw ConfigError("relevance edge index out of range");
      r.edge_scores[l][q * r.widths[l] + p] = e.at("score").get<double>();
      r.edge_std[l][q * r.widths[l] + p] = e.value("std", 0.0);
    }
    for (const auto& v : rel["vertices"]) {
      const auto l = v.at("l").get<std::size_t>(), i = v.at("i").get<std::size_t>();
      if (l > depth || i >= r.widths[l]) throw ConfigError("relevance vertex index out of range");
      r.vertex_scores[l][i] = v.at("score").get<double>();
      r.vertex_std[l][i] = v.value("std", 0.0);
    }

    VizDocument doc{std::move(model), std::move(r), {}, j["feature_names"].get<std::vector<std::string>>()};
    for (const auto& s : j["surfaces"]) {
      EdgeSurface e;
      e.l = s["l"].get<std::size_t>();
      e.q = s["q"].get<std::size_t>();
      e.p = s["p"].get<std::size_t>();
      e.resolution = s["resolution"].get<std::size_t>();
      e.magnitude = s["magnitude"].get<std::vector<double>>();
      e.phase = s["phase"].get<std::vector<double>>();
      doc.surfaces.push_back(std::move(e));
    }
    return doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid viewer document: ") + e.what());
  }
}

void export_viz(const Model& model, const RelevanceReport& report, std::size_t resolution,
                std::vector<std::string> feature_names, const std::filesystem::path& path) {
  write_text_file(path, viz_to_json_text(build_viz(model, report, resolution, std::move(feature_names))));
}

}  // namespace cvkan
