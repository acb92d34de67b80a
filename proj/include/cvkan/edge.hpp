#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cvkan/complex.hpp"
#include "cvkan/grid.hpp"

namespace cvkan {

enum class OutputDomain { complex, real };
enum class CsiluVariant { complex_weight, real_weight };

std::string_view to_string(OutputDomain d);
std::string_view to_string(CsiluVariant v);
OutputDomain parse_output_domain(std::string_view s);
CsiluVariant parse_csilu_variant(std::string_view s);

/// Residual activation parameters. Four real degrees of freedom for either variant:
/// (w_c, beta) for complex-weight, (w1, w2, beta) for real-weight.
struct CsiluParams {
  CsiluVariant variant = CsiluVariant::complex_weight;
  Complex w_c{1.0, 0.0};
  double w1 = 1.0;
  double w2 = 1.0;
  Complex beta{0.0, 0.0};
};

/// complex-weight: w_c * (SiLU(Re x) + i SiLU(Im x)) + beta
/// real-weight:    w1 SiLU(Re x) + i w2 SiLU(Im x) + beta
Complex csilu(Complex x, const CsiluParams& p);

/// Residual used by real-output edges. complex-weight keeps Re(w_c * CSiLU(x)) + Re(beta);
/// real-weight sums both weighted channels, w1 SiLU(Re x) + w2 SiLU(Im x) + Re(beta).
double csilu_real_output(Complex x, const CsiluParams& p);

std::size_t edge_param_count(int grid_points, OutputDomain domain);

/// One learnable C -> C (or C -> R) edge map: sum_{u,v} w_{u,v} phi(x - g_{u,v}) + residual.
struct EdgeFunction {
  GridSpec grid;
  /// G*G weights, row-major over (u, v). Imaginary parts are zero for real-output edges.
  std::vector<Complex> weights;
  CsiluParams csilu;
  OutputDomain output_domain = OutputDomain::complex;

  static EdgeFunction zeros(const GridSpec& grid, CsiluVariant variant, OutputDomain domain);

  std::size_t param_count() const { return edge_param_count(grid.points, output_domain); }
  void validate() const;
};

/// Evaluates the edge. For real-output edges the imaginary part of the result is 0.
Complex edge_forward(Complex x, const EdgeFunction& e);

/// RBF part only (no residual).
Complex edge_rbf_sum(Complex x, const EdgeFunction& e);

/// Real FastKAN-style edge: sum_i w_i rbf_real(x, g_i) + silu_weight * SiLU(x).
double real_edge_forward(double x, std::span<const double> weights, const GridSpec& grid,
                         double silu_weight);

/// A C -> R map given by real weights on the complex grid.
struct RealWeightBank {
  GridSpec grid;
  std::vector<double> weights;

  double evaluate(Complex x) const;
};

/// Splits a complex-output edge into (Re w, Im w) banks; f_re(x) + i f_im(x) equals the RBF sum.
std::pair<RealWeightBank, RealWeightBank> split_real_equivalence(const EdgeFunction& e);

}  // namespace cvkan
