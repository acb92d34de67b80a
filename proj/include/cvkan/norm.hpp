#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cvkan/complex.hpp"

namespace cvkan {

enum class NormVariant { none, bn_c, bn_v, bn_r2, bn_real };
enum class Mode { train, eval };

std::string_view to_string(NormVariant v);
NormVariant parse_norm_variant(std::string_view s);

/// Trainable reals per normalized feature: 5 / 3 / 4 / 2 / 0 for bn_c / bn_v / bn_r2 / bn_real / none.
std::size_t norm_params_per_feature(NormVariant v);

struct NormOptions {
  double momentum = 0.1;
  double epsilon = 1e-5;
};

/// Running statistics of one feature. Unused fields stay at their defaults.
struct RunningStats {
  Complex mean{0.0, 0.0};
  /// Population covariance of (Re, Im): [[cov_rr, cov_ri], [cov_ri, cov_ii]] (bn_c);
  /// bn_r2 keeps its two channel variances in cov_rr and cov_ii.
  double cov_rr = 1.0;
  double cov_ri = 0.0;
  double cov_ii = 1.0;
  /// Complex variance E|z - mean|^2 (bn_v), or the real-channel variance (bn_real).
  double var = 1.0;

  bool operator==(const RunningStats&) const = default;
};

/// Batch normalization over the sample axis, one set of statistics per feature column.
///
/// Per-feature parameter layout:
///   bn_c    [g_rr, g_ri, g_ii, beta.re, beta.im]   (symmetric 2x2 gamma)
///   bn_v    [gamma, beta.re, beta.im]
///   bn_r2   [gamma_re, beta_re, gamma_im, beta_im]
///   bn_real [gamma, beta]                          (real part only; output is real)
///
/// Train mode uses population batch statistics and updates the running averages;
/// eval mode uses the running averages and is a fixed affine map.
class NormLayer {
 public:
  NormLayer(NormVariant variant, std::size_t features, NormOptions options = {});

  NormVariant variant() const { return variant_; }
  std::size_t features() const { return features_; }
  std::size_t param_count() const { return features_ * norm_params_per_feature(variant_); }
  const NormOptions& options() const { return options_; }

  /// Identity affine: gamma = 1 (or I), beta = 0.
  void init(std::span<double> params) const;

  /// Train mode requires at least two rows and records what backward needs.
  ComplexBatch forward(const ComplexBatch& x, std::span<const double> params, Mode mode);

  /// Stateless evaluation with running statistics.
  ComplexBatch apply_eval(const ComplexBatch& x, std::span<const double> params) const;

  /// Gradient for the most recent forward call. Accumulates into grad_params.
  ComplexBatch backward(const ComplexBatch& grad_out, std::span<const double> params,
                        std::span<double> grad_params) const;

  std::span<const RunningStats> running() const { return running_; }
  std::span<RunningStats> running() { return running_; }

 private:
  // Per-feature intermediates of the last forward pass.
  struct Cache {
    Mode mode = Mode::eval;
    std::size_t rows = 0;
    std::vector<Complex> centered;    // rows x features
    std::vector<Complex> normalized;  // rows x features
    std::vector<double> stats;        // variant-specific, per feature
  };

  NormVariant variant_;
  std::size_t features_;
  NormOptions options_;
  std::vector<RunningStats> running_;
  Cache cache_;
};

/// Inverse square root of the symmetric positive definite matrix [[a, b], [b, c]],
/// returned as (w_rr, w_ri, w_ii).
struct Sym2 {
  double rr;
  double ri;
  double ii;
};
Sym2 inverse_sqrt_sym2(double a, double b, double c);

}  // namespace cvkan
