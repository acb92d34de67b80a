#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvkan/complex.hpp"
#include "cvkan/grid.hpp"

namespace cvkan {

enum class TaskKind { regression, classification };

struct FeatureInfo {
  std::string name;
  bool originally_real = false;
};

struct Dataset {
  std::string id;
  TaskKind task = TaskKind::regression;
  ComplexBatch features;
  std::vector<FeatureInfo> feature_info;
  /// Regression targets (rows x k). Empty for classification.
  ComplexBatch targets;
  /// Class indices in [0, num_classes). Empty for regression.
  std::vector<int> labels;
  std::size_t num_classes = 0;
  /// Original class values (e.g. knot signatures) by class index.
  std::vector<long long> class_values;
  /// Set by to_split_real. split_pairs[i] tells whether original feature i became a
  /// (Re, Im) pair of columns; targets are always paired.
  bool split_real = false;
  std::vector<bool> split_pairs;

  std::size_t rows() const { return features.rows(); }
  std::size_t feature_count() const { return features.cols(); }
  std::size_t output_width() const { return task == TaskKind::regression ? targets.cols() : num_classes; }
  std::vector<std::string> feature_names() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset select_features(std::span<const std::size_t> columns) const;
};

enum class SymbolicFunction { f1, f2, f3, f4 };

SymbolicFunction parse_symbolic(std::string_view id);
std::size_t symbolic_arity(SymbolicFunction f);

/// z^2, sin z, z1 z2, (z1^2 + z2^2)^2 in complex arithmetic.
Complex evaluate_symbolic(SymbolicFunction f, std::span<const Complex> z);

/// The equivalent real maps R^2 -> R^2 (or R^4 -> R^2), returned as (Re, Im).
std::pair<double, double> evaluate_symbolic_real(SymbolicFunction f, std::span<const double> xy);

/// Features i.i.d. uniform over the grid square, one complex variable per input.
Dataset gen_symbolic(SymbolicFunction f, std::size_t n, std::uint64_t seed, const GridSpec& grid = {});

/// H = E_R_hat * |E_R + E_0|^2 with features (E_R_hat, E_R, E_0).
Complex holography_target(Complex e_r_hat, Complex e_r, Complex e_0);
Dataset gen_holography(std::size_t n, std::uint64_t seed, const GridSpec& grid = {});

struct CircuitInputs {
  Complex u_g;
  double r_g;
  double r_l;
  double l;
  double c;
  double omega;
};

/// U_RL = U_G / (1 + R_G/R_L - w^2 L C + i w (L/R_L + R_G C))
Complex circuit_target(const CircuitInputs& in);

struct CircuitDataset {
  Dataset data;
  std::size_t rejected = 0;
};

/// Features (U_G, R_G, R_L, L, C, omega), all sampled over the grid range. Samples with a
/// non-finite target or |target| > 1e6 are redrawn; DataError when over half are rejected.
CircuitDataset gen_circuit(std::size_t n, std::uint64_t seed, const GridSpec& grid = {});

/// Affine map of each observed real channel onto [lo, hi], plus the signature -> class map.
struct KnotNormalization {
  struct Channel {
    double min;
    double max;
  };
  std::vector<std::string> feature_names;
  std::vector<bool> feature_is_complex;
  std::vector<Channel> re;  // per feature
  std::vector<Channel> im;  // per feature, only meaningful when complex
  std::vector<long long> signatures;  // class index -> signature value, ascending
};

struct KnotLoad {
  Dataset data;
  KnotNormalization normalization;
  std::vector<std::string> warnings;
};

/// Reads the knot CSV: header row, real columns, complex columns as <name>_re/<name>_im pairs,
/// and a final integer `signature` column. With `existing`, its constants and class map are
/// reused and an unseen signature is an error.
KnotLoad load_knots(const std::filesystem::path& path, const GridSpec& grid = {},
                    const KnotNormalization* existing = nullptr);
KnotLoad parse_knots(std::string_view csv_text, const GridSpec& grid = {},
                     const KnotNormalization* existing = nullptr);

/// Column names of the knot surrogate, mirroring the 13 real + 2 complex invariants.
std::vector<std::string> knot_feature_names();

/// Synthetic stand-in with the knot dataset's shape: 15 features (13 real, 2 complex),
/// 14 classes driven mostly by the two translation features.
Dataset make_knot_surrogate(std::size_t n, std::uint64_t seed, const GridSpec& grid = {});

/// Writes features/targets (or signature labels) in the knot CSV layout.
std::string dataset_to_csv(const Dataset& d);

/// Each complex feature/target becomes (Re, Im) real columns; originally-real features stay a
/// single column and labels pass through.
Dataset to_split_real(const Dataset& d);
/// Inverse of to_split_real.
Dataset from_split_real(const Dataset& d);
/// Pairs adjacent real columns back into complex values.
ComplexBatch recombine_pairs(const ComplexBatch& split);

}  // namespace cvkan
