#include "cvkan/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "cvkan/errors.hpp"

namespace cvkan {

std::string_view to_string(ModelKind k) { return k == ModelKind::cvkan ? "cvkan" : "fastkan"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "cvkan") return ModelKind::cvkan;
  if (s == "fastkan") return ModelKind::fastkan;
  throw ConfigError("unknown model kind '" + std::string(s) + "' (expected cvkan|fastkan)");
}

void Architecture::validate() const {
  if (widths.size() < 2) throw ConfigError("architecture needs at least an input and an output width");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("layer widths must be positive");
  }
  grid.validate();
  if (kind == ModelKind::cvkan && norm == NormVariant::bn_real) {
    throw ConfigError("bn_real applies to the real-valued FastKAN baseline only");
  }
  if (kind == ModelKind::fastkan && norm != NormVariant::none && norm != NormVariant::bn_real) {
    throw ConfigError("FastKAN supports only none or bn_real normalization");
  }
}

std::string Architecture::size_label() const {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(widths[i]);
  }
  return out;
}

std::vector<std::size_t> parse_widths(std::string_view text) {
  std::string normalized;
  for (std::size_t i = 0; i < text.size(); ++i) {
    // U+00D7 multiplication sign in UTF-8
    if (static_cast<unsigned char>(text[i]) == 0xC3 && i + 1 < text.size() &&
        static_cast<unsigned char>(text[i + 1]) == 0x97) {
      normalized += ' ';
      ++i;
    } else if (text[i] == 'x' || text[i] == 'X' || text[i] == ',') {
      normalized += ' ';
    } else {
      normalized += text[i];
    }
  }
  std::istringstream in(normalized);
  std::vector<std::size_t> widths;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &used);
    } catch (const std::exception&) {
      throw ConfigError("invalid width '" + token + "'");
    }
    if (used != token.size() || v <= 0) throw ConfigError("invalid width '" + token + "'");
    widths.push_back(static_cast<std::size_t>(v));
  }
  if (widths.size() < 2) throw ConfigError("widths need at least two entries, got '" + std::string(text) + "'");
  return widths;
}

std::size_t param_count(const Architecture& arch) {
  arch.validate();
  const std::size_t depth = arch.depth();
  const auto g = static_cast<std::size_t>(arch.grid.points);
  std::size_t total = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t edges = arch.widths[l] * arch.widths[l + 1];
    if (arch.kind == ModelKind::cvkan) {
      const OutputDomain domain = l + 1 == depth ? arch.output_domain : OutputDomain::complex;
      total += edges * edge_param_count(arch.grid.points, domain);
    } else {
      total += edges * (g + 1) + arch.widths[l + 1];
    }
    if (l + 1 < depth) total += arch.widths[l + 1] * norm_params_per_feature(arch.norm);
  }
  return total;
}

namespace {

template <class F>
decltype(auto) visit_layer(const std::variant<CvkanLayer, FastKanLayer>& layer, F&& f) {
  return std::visit(std::forward<F>(f), layer);
}

void require_finite(const ComplexBatch& g, const std::string& where) {
  if (!g.all_finite()) throw GradientError("non-finite gradient in " + where);
}

}  // namespace

Model Model::from_parameters(const Architecture& arch, std::vector<double> params, NormOptions norm_options) {
  arch.validate();
  Model m;
  m.arch_ = arch;
  const std::size_t depth = arch.depth();
  std::size_t offset = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t in = arch.widths[l];
    const std::size_t out = arch.widths[l + 1];
    if (arch.kind == ModelKind::cvkan) {
      const OutputDomain domain = l + 1 == depth ? arch.output_domain : OutputDomain::complex;
      m.layers_.emplace_back(CvkanLayer(in, out, arch.grid, arch.csilu, domain));
    } else {
      m.layers_.emplace_back(FastKanLayer(in, out, arch.grid));
    }
    m.layer_offsets_.push_back(offset);
    offset += visit_layer(m.layers_.back(), [](const auto& layer) { return layer.param_count(); });
    if (l + 1 < depth) {
      m.norms_.emplace_back(arch.norm, out, norm_options);
      m.norm_offsets_.push_back(offset);
      offset += m.norms_.back().param_count();
    }
  }
  if (offset != cvkan::param_count(arch)) throw ConfigError("internal parameter layout mismatch");
  if (params.size() != offset) {
    throw ConfigError("parameter vector has " + std::to_string(params.size()) + " entries, architecture " +
                      arch.size_label() + " needs " + std::to_string(offset));
  }
  m.params_ = std::move(params);
  return m;
}

Model Model::init(const Architecture& arch, std::uint64_t seed, NormOptions norm_options) {
  Model m = from_parameters(arch, std::vector<double>(cvkan::param_count(arch), 0.0), norm_options);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < m.layers_.size(); ++l) {
    auto span = m.layer_params(l);
    visit_layer(m.layers_[l], [&](const auto& layer) { layer.init(span, rng); });
  }
  for (std::size_t l = 0; l < m.norms_.size(); ++l) {
    m.norms_[l].init(std::span<double>(m.params_).subspan(m.norm_offsets_[l], m.norms_[l].param_count()));
  }
  return m;
}

std::span<const double> Model::layer_params(std::size_t l) const {
  const std::size_t n = visit_layer(layers_.at(l), [](const auto& layer) { return layer.param_count(); });
  return std::span<const double>(params_).subspan(layer_offsets_[l], n);
}

std::span<double> Model::layer_params(std::size_t l) {
  const std::size_t n = visit_layer(layers_.at(l), [](const auto& layer) { return layer.param_count(); });
  return std::span<double>(params_).subspan(layer_offsets_[l], n);
}

std::span<const double> Model::norm_params(std::size_t l) const {
  return std::span<const double>(params_).subspan(norm_offsets_.at(l), norms_[l].param_count());
}

std::vector<LayoutEntry> Model::layout() const {
  std::vector<LayoutEntry> out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    out.push_back({"edges", l, layer_offsets_[l], layer_params(l).size()});
    if (l < norms_.size()) out.push_back({"norm", l, norm_offsets_[l], norms_[l].param_count()});
  }
  return out;
}

ComplexBatch Model::forward(const ComplexBatch& x, Mode mode) {
  if (x.cols() != arch_.widths.front()) {
    throw ShapeError("model input width " + std::to_string(x.cols()) + " != " + std::to_string(arch_.widths.front()));
  }
  cache_.assign(layers_.size(), ComplexBatch{});
  ComplexBatch h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    cache_[l] = h;
    const auto lp = layer_params(l);
    h = visit_layer(layers_[l], [&](const auto& layer) { return layer.forward(h, lp); });
    if (l < norms_.size()) h = norms_[l].forward(h, norm_params(l), mode);
  }
  return h;
}

ComplexBatch Model::predict(const ComplexBatch& x) const {
  if (x.cols() != arch_.widths.front()) {
    throw ShapeError("model input width " + std::to_string(x.cols()) + " != " + std::to_string(arch_.widths.front()));
  }
  ComplexBatch h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto lp = layer_params(l);
    h = visit_layer(layers_[l], [&](const auto& layer) { return layer.forward(h, lp); });
    if (l < norms_.size()) h = norms_[l].apply_eval(h, norm_params(l));
  }
  return h;
}

void Model::backward(const ComplexBatch& grad_out, std::span<double> grad_params) {
  if (cache_.size() != layers_.size()) throw GradientError("backward called before forward");
  if (grad_params.size() != params_.size()) throw ShapeError("gradient vector length does not match the model");
  std::fill(grad_params.begin(), grad_params.end(), 0.0);
  require_finite(grad_out, "loss gradient");
  ComplexBatch g = grad_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l < norms_.size()) {
      g = norms_[l].backward(g, norm_params(l), grad_params.subspan(norm_offsets_[l], norms_[l].param_count()));
      require_finite(g, "normalization after layer " + std::to_string(l));
    }
    const auto lp = layer_params(l);
    auto glp = grad_params.subspan(layer_offsets_[l], lp.size());
    g = visit_layer(layers_[l], [&](const auto& layer) { return layer.backward(cache_[l], g, lp, glp); });
    require_finite(g, "edge layer " + std::to_string(l));
  }
  for (double v : grad_params) {
    if (!std::isfinite(v)) throw GradientError("non-finite parameter gradient");
  }
}

EdgeFunction Model::edge(std::size_t l, std::size_t q, std::size_t p) const {
  const auto* layer = std::get_if<CvkanLayer>(&layers_.at(l));
  if (layer == nullptr) throw ConfigError("edge functions are defined for CVKAN layers only");
  return layer->edge(q, p, layer_params(l));
}

void Model::set_edge(std::size_t l, std::size_t q, std::size_t p, const EdgeFunction& e) {
  const auto* layer = std::get_if<CvkanLayer>(&layers_.at(l));
  if (layer == nullptr) throw ConfigError("edge functions are defined for CVKAN layers only");
  layer->set_edge(q, p, e, layer_params(l));
}

Model::Trace Model::trace(const ComplexBatch& x) const {
  Trace t;
  ComplexBatch h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto lp = layer_params(l);
    t.inputs.push_back(h);
    t.edges.push_back(visit_layer(layers_[l], [&](const auto& layer) { return layer.edge_outputs(h, lp); }));
    h = visit_layer(layers_[l], [&](const auto& layer) { return layer.forward(h, lp); });
    t.sums.push_back(h);
    if (l < norms_.size()) h = norms_[l].apply_eval(h, norm_params(l));
  }
  return t;
}

}  // namespace cvkan
