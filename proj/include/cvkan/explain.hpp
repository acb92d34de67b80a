#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cvkan/complex.hpp"
#include "cvkan/datasets.hpp"
#include "cvkan/edge.hpp"
#include "cvkan/model.hpp"

namespace cvkan {

/// sqrt(1/(n-1) * sum |z_i - mean|^2). Requires n >= 2.
double complex_std(std::span<const Complex> values);

/// Edge and vertex relevance. Output vertices score 1; walking backwards, edge (l, q, p)
/// receives score(l+1, q) * sigma(l, q, p) / sum_p' sigma(l, q, p'), and vertex (l, p)
/// the sum of its outgoing edge scores.
struct RelevanceReport {
  std::string dataset_id;
  std::size_t samples = 0;
  std::vector<std::size_t> widths;
  /// edge_scores[l][q * n_l + p]
  std::vector<std::vector<double>> edge_scores;
  std::vector<std::vector<double>> edge_std;
  /// vertex_scores[l][i] for l = 0..L
  std::vector<std::vector<double>> vertex_scores;
  /// Spread of each vertex value (inputs for l = 0, summed node values after that).
  std::vector<std::vector<double>> vertex_std;
  std::vector<std::string> warnings;

  double edge(std::size_t l, std::size_t q, std::size_t p) const {
    return edge_scores[l][q * widths[l] + p];
  }
};

RelevanceReport relevance(const Model& model, const ComplexBatch& inputs, std::string dataset_id = {});

/// Input features ordered by relevance, highest first; ties keep the lower index first.
std::vector<std::size_t> rank_features(const RelevanceReport& report);

enum class PruneMode { keep_top_k, drop_top_k };

/// Keeps (or removes) the k most relevant input features. Surviving columns keep their order.
Dataset prune_features(const Dataset& data, const RelevanceReport& report, PruneMode mode, std::size_t k);

struct EdgeSurface {
  std::size_t l = 0;
  std::size_t q = 0;
  std::size_t p = 0;
  std::size_t resolution = 0;
  /// Row-major over (re-index, im-index).
  std::vector<double> magnitude;
  /// Radians in (-pi, pi].
  std::vector<double> phase;
};

/// Evaluates the edge on a resolution x resolution lattice spanning the grid square.
EdgeSurface sample_edge_surface(const EdgeFunction& edge, std::size_t resolution);

/// arg(z) folded into (-pi, pi].
double phase_of(Complex z);

inline constexpr int kVizFormatVersion = 1;
inline constexpr std::size_t kDefaultSurfaceResolution = 64;

/// Serialized model, relevance and sampled surfaces for the viewer.
struct VizDocument {
  Model model;
  RelevanceReport relevance;
  std::vector<EdgeSurface> surfaces;
  std::vector<std::string> feature_names;
};

VizDocument build_viz(const Model& model, const RelevanceReport& report, std::size_t resolution,
                      std::vector<std::string> feature_names);

std::string viz_to_json_text(const VizDocument& doc);
VizDocument viz_from_json_text(const std::string& text);

/// Writes the document; deterministic byte output for equal inputs.
void export_viz(const Model& model, const RelevanceReport& report, std::size_t resolution,
                std::vector<std::string> feature_names, const std::filesystem::path& path);

/// Structural checks of a parsed document against the published layout. Returns the
/// list of problems (empty when valid).
std::vector<std::string> validate_viz_json_text(const std::string& text);

}  // namespace cvkan
