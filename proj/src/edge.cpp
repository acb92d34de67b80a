#include "cvkan/edge.hpp"

#include <cmath>
#include <string>

#include "cvkan/errors.hpp"

namespace cvkan {

std::string_view to_string(OutputDomain d) { return d == OutputDomain::complex ? "complex" : "real"; }

std::string_view to_string(CsiluVariant v) {
  return v == CsiluVariant::complex_weight ? "complex_weight" : "real_weight";
}

OutputDomain parse_output_domain(std::string_view s) {
  if (s == "complex") return OutputDomain::complex;
  if (s == "real") return OutputDomain::real;
  throw ConfigError("unknown output_domain '" + std::string(s) + "' (expected complex|real)");
}

CsiluVariant parse_csilu_variant(std::string_view s) {
  if (s == "complex_weight" || s == "c") return CsiluVariant::complex_weight;
  if (s == "real_weight" || s == "r") return CsiluVariant::real_weight;
  throw ConfigError("unknown csilu variant '" + std::string(s) +
                    "' (expected complex_weight|real_weight)");
}

Complex csilu(Complex x, const CsiluParams& p) {
  const double sr = silu(x.real());
  const double si = silu(x.imag());
  if (p.variant == CsiluVariant::complex_weight) {
    return complex_add(complex_mul(p.w_c, Complex(sr, si)), p.beta);
  }
  return {p.w1 * sr + p.beta.real(), p.w2 * si + p.beta.imag()};
}

double csilu_real_output(Complex x, const CsiluParams& p) {
  const double sr = silu(x.real());
  const double si = silu(x.imag());
  if (p.variant == CsiluVariant::complex_weight) {
    return p.w_c.real() * sr - p.w_c.imag() * si + p.beta.real();
  }
  return p.w1 * sr + p.w2 * si + p.beta.real();
}

std::size_t edge_param_count(int grid_points, OutputDomain domain) {
  const auto g2 = static_cast<std::size_t>(grid_points) * static_cast<std::size_t>(grid_points);
  return domain == OutputDomain::complex ? 2 * g2 + 4 : g2 + 3;
}

EdgeFunction EdgeFunction::zeros(const GridSpec& grid, CsiluVariant variant, OutputDomain domain) {
  grid.validate();
  EdgeFunction e;
  e.grid = grid;
  e.weights.assign(static_cast<std::size_t>(grid.points * grid.points), Complex{});
  e.csilu.variant = variant;
  e.csilu.w_c = {};
  e.csilu.w1 = 0.0;
  e.csilu.w2 = 0.0;
  e.output_domain = domain;
  return e;
}

void EdgeFunction::validate() const {
  grid.validate();
  if (weights.size() != static_cast<std::size_t>(grid.points * grid.points)) {
    throw ShapeError("edge weights must hold G*G values");
  }
  if (output_domain == OutputDomain::real) {
    for (Complex w : weights) {
      if (w.imag() != 0.0) throw ConfigError("real-output edge with a non-zero imaginary weight");
    }
  }
}

Complex edge_rbf_sum(Complex x, const EdgeFunction& e) {
  const auto grid = make_grid(e.grid);
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double phi = rbf_complex(x, grid[k], e.grid.bandwidth);
    re += e.weights[k].real() * phi;
    im += e.weights[k].imag() * phi;
  }
  return {re, im};
}

Complex edge_forward(Complex x, const EdgeFunction& e) {
  const Complex rbf = edge_rbf_sum(x, e);
  if (e.output_domain == OutputDomain::real) {
    return {rbf.real() + csilu_real_output(x, e.csilu), 0.0};
  }
  return complex_add(rbf, csilu(x, e.csilu));
}

double real_edge_forward(double x, std::span<const double> weights, const GridSpec& grid,
                         double silu_weight) {
  const auto axis = make_grid_1d(grid);
  if (weights.size() != axis.size()) throw ShapeError("real edge needs G weights");
  double sum = 0.0;
  for (std::size_t i = 0; i < axis.size(); ++i) sum += weights[i] * rbf_real(x, axis[i], grid.bandwidth);
  return sum + silu_weight * silu(x);
}

double RealWeightBank::evaluate(Complex x) const {
  const auto points = make_grid(grid);
  double sum = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    sum += weights[k] * rbf_complex(x, points[k], grid.bandwidth);
  }
  return sum;
}

std::pair<RealWeightBank, RealWeightBank> split_real_equivalence(const EdgeFunction& e) {
  if (e.output_domain != OutputDomain::complex) {
    throw ConfigError("split_real_equivalence needs a complex-output edge");
  }
  RealWeightBank re{e.grid, {}};
  RealWeightBank im{e.grid, {}};
  re.weights.reserve(e.weights.size());
  im.weights.reserve(e.weights.size());
  for (Complex w : e.weights) {
    re.weights.push_back(w.real());
    im.weights.push_back(w.imag());
  }
  return {std::move(re), std::move(im)};
}

}  // namespace cvkan
