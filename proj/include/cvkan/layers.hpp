#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "cvkan/complex.hpp"
#include "cvkan/edge.hpp"
#include "cvkan/grid.hpp"

namespace cvkan {

/// Bank of n_out x n_in complex RBF edges. Output node q sums edge (q, p) over inputs p.
///
/// Parameters live in an external flat span. Edge (q, p) occupies block q * n_in + p.
/// Complex-output block: 2G^2 interleaved (re, im) RBF weights row-major over (u, v),
/// then the residual [w_c.re, w_c.im, beta.re, beta.im] or [w1, w2, beta.re, beta.im].
/// Real-output block: G^2 real RBF weights, then [w_c.re, w_c.im, beta.re] or [w1, w2, beta.re].
class CvkanLayer {
 public:
  CvkanLayer(std::size_t in, std::size_t out, GridSpec grid, CsiluVariant csilu,
             OutputDomain domain);

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  const GridSpec& grid() const { return grid_; }
  CsiluVariant csilu_variant() const { return csilu_; }
  OutputDomain output_domain() const { return domain_; }

  std::size_t edge_stride() const { return stride_; }
  std::size_t rbf_count() const;
  std::size_t param_count() const { return in_ * out_ * stride_; }

  /// RBF weights ~ N(0, (1/G)^2) per real channel, residual weights 1, bias 0.
  void init(std::span<double> params, std::mt19937_64& rng) const;

  ComplexBatch forward(const ComplexBatch& x, std::span<const double> params) const;

  /// Accumulates into grad_params; returns d(loss)/d(x).
  ComplexBatch backward(const ComplexBatch& x, const ComplexBatch& grad_out,
                        std::span<const double> params, std::span<double> grad_params) const;

  /// Per-edge outputs, laid out [sample][q][p].
  std::vector<Complex> edge_outputs(const ComplexBatch& x, std::span<const double> params) const;

  EdgeFunction edge(std::size_t q, std::size_t p, std::span<const double> params) const;
  void set_edge(std::size_t q, std::size_t p, const EdgeFunction& e, std::span<double> params) const;

 private:
  struct Basis;
  void compute_basis(Complex x, Basis& b, bool with_derivative) const;

  std::size_t in_;
  std::size_t out_;
  GridSpec grid_;
  CsiluVariant csilu_;
  OutputDomain domain_;
  std::size_t stride_;
  std::vector<double> axis_;
};

/// Real-valued FastKAN baseline layer: out_q = sum_p [sum_i w_{q,p,i} phi(x_p - g_i)
/// + s_{q,p} SiLU(x_p)] + b_q. Operates on the real part of its input; outputs are real.
///
/// Layout: per edge (q-major) G RBF weights then the SiLU weight, followed by n_out biases.
class FastKanLayer {
 public:
  FastKanLayer(std::size_t in, std::size_t out, GridSpec grid);

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  std::size_t edge_stride() const { return grid_.points + 1; }
  std::size_t param_count() const { return in_ * out_ * edge_stride() + out_; }

  void init(std::span<double> params, std::mt19937_64& rng) const;
  ComplexBatch forward(const ComplexBatch& x, std::span<const double> params) const;
  ComplexBatch backward(const ComplexBatch& x, const ComplexBatch& grad_out,
                        std::span<const double> params, std::span<double> grad_params) const;
  std::vector<Complex> edge_outputs(const ComplexBatch& x, std::span<const double> params) const;

 private:
  std::size_t in_;
  std::size_t out_;
  GridSpec grid_;
  std::vector<double> axis_;
};

}  // namespace cvkan
