#pragma once

#include <vector>

#include "cvkan/complex.hpp"

namespace cvkan {

/// Uniform grid over [lo, hi] per axis; the complex grid is its G x G product.
struct GridSpec {
  double lo = -2.0;
  double hi = 2.0;
  int points = 8;
  /// RBF width divisor: phi(x) = exp(-(x/bandwidth)^2).
  double bandwidth = 1.0;

  void validate() const;
  double spacing() const { return (hi - lo) / (points - 1); }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(Complex z) const;

  bool operator==(const GridSpec&) const = default;
};

/// G points, first == lo and last == hi.
std::vector<double> make_grid_1d(const GridSpec& spec);

/// G*G points g_{u,v} = g_u + i g_v, row-major with u the real index.
std::vector<Complex> make_grid(const GridSpec& spec);

double rbf_real(double x, double g, double bandwidth);
double rbf_complex(Complex x, Complex g, double bandwidth);

double sigmoid(double x);
double silu(double x);
double silu_derivative(double x);

}  // namespace cvkan
