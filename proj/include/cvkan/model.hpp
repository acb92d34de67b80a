#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cvkan/complex.hpp"
#include "cvkan/edge.hpp"
#include "cvkan/grid.hpp"
#include "cvkan/layers.hpp"
#include "cvkan/norm.hpp"

namespace cvkan {

enum class ModelKind { cvkan, fastkan };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct Architecture {
  ModelKind kind = ModelKind::cvkan;
  std::vector<std::size_t> widths;
  GridSpec grid;
  NormVariant norm = NormVariant::bn_c;
  CsiluVariant csilu = CsiluVariant::complex_weight;
  OutputDomain output_domain = OutputDomain::complex;

  /// Throws ConfigError on invalid combinations.
  void validate() const;

  std::size_t depth() const { return widths.size() - 1; }

  /// "2x4x2x1"
  std::string size_label() const;

  bool operator==(const Architecture&) const = default;
};

/// Parses "2x4x2x1" (also accepts ',' or the multiplication sign as separator).
std::vector<std::size_t> parse_widths(std::string_view text);

/// Exact number of trainable reals.
///
/// CVKAN: 2G^2 + 4 per complex-output edge, G^2 + 3 per real-output edge, plus the
/// normalization parameters of every hidden feature (independent of the CSiLU variant).
/// FastKAN: G + 1 per edge, one bias per output node, plus the normalization parameters.
std::size_t param_count(const Architecture& arch);

/// One segment of the flat parameter vector.
struct LayoutEntry {
  std::string kind;  // "edges" or "norm"
  std::size_t layer;
  std::size_t offset;
  std::size_t size;
};

/// Edge layers interleaved with normalization after every but the last layer.
///
/// All trainable parameters live in one flat vector. forward() in train mode caches
/// activations for backward(); predict() is const and safe to call concurrently.
class Model {
 public:
  static Model init(const Architecture& arch, std::uint64_t seed, NormOptions norm_options = {});

  /// Rebuilds a model around an existing parameter vector (running statistics at defaults).
  static Model from_parameters(const Architecture& arch, std::vector<double> params,
                               NormOptions norm_options = {});

  const Architecture& architecture() const { return arch_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<LayoutEntry> layout() const;

  ComplexBatch forward(const ComplexBatch& x, Mode mode);
  ComplexBatch predict(const ComplexBatch& x) const;

  /// Gradient of the loss whose output gradient is grad_out, for the last forward call.
  /// Overwrites grad_params. Throws GradientError on non-finite intermediates.
  void backward(const ComplexBatch& grad_out, std::span<double> grad_params);

  std::size_t depth() const { return arch_.depth(); }
  std::span<const std::variant<CvkanLayer, FastKanLayer>> layers() const { return layers_; }
  std::span<const NormLayer> norms() const { return norms_; }
  std::span<NormLayer> norms() { return norms_; }
  std::span<const double> layer_params(std::size_t l) const;
  std::span<double> layer_params(std::size_t l);
  std::span<const double> norm_params(std::size_t l) const;

  /// CVKAN only.
  EdgeFunction edge(std::size_t l, std::size_t q, std::size_t p) const;
  void set_edge(std::size_t l, std::size_t q, std::size_t p, const EdgeFunction& e);

  /// Eval-mode pass recording per-layer inputs, per-edge outputs and summed node values.
  struct Trace {
    std::vector<ComplexBatch> inputs;         // inputs[l]: rows x n_l
    std::vector<std::vector<Complex>> edges;  // edges[l]: [sample][q][p]
    std::vector<ComplexBatch> sums;           // sums[l]: rows x n_{l+1}, before normalization
  };
  Trace trace(const ComplexBatch& x) const;

 private:
  Model() = default;

  Architecture arch_;
  std::vector<double> params_;
  std::vector<std::variant<CvkanLayer, FastKanLayer>> layers_;
  std::vector<NormLayer> norms_;
  std::vector<std::size_t> layer_offsets_;
  std::vector<std::size_t> norm_offsets_;
  std::vector<ComplexBatch> cache_;  // input to each layer for the last forward
};

}  // namespace cvkan
