#include "cvkan/grid.hpp"

#include <cmath>

#include "cvkan/errors.hpp"

namespace cvkan {

void GridSpec::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) {
    throw ConfigError("grid: lo must be below hi");
  }
  if (points < 2) throw ConfigError("grid: at least 2 points per dimension are required");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ConfigError("grid: bandwidth must be positive");
  }
}

bool GridSpec::contains(Complex z) const {
  return z.real() >= lo && z.real() <= hi && z.imag() >= lo && z.imag() <= hi;
}

std::vector<double> make_grid_1d(const GridSpec& spec) {
  spec.validate();
  std::vector<double> g(static_cast<std::size_t>(spec.points));
  const double span = spec.hi - spec.lo;
  const int last = spec.points - 1;
  for (int i = 0; i < spec.points; ++i) g[i] = spec.lo + span * i / last;
  return g;
}

std::vector<Complex> make_grid(const GridSpec& spec) {
  const auto axis = make_grid_1d(spec);
  std::vector<Complex> g;
  g.reserve(axis.size() * axis.size());
  for (double re : axis) {
    for (double im : axis) g.emplace_back(re, im);
  }
  return g;
}

double rbf_real(double x, double g, double bandwidth) {
  const double d = (x - g) / bandwidth;
  return std::exp(-d * d);
}

double rbf_complex(Complex x, Complex g, double bandwidth) {
  const double dr = x.real() - g.real();
  const double di = x.imag() - g.imag();
  return std::exp(-(dr * dr + di * di) / (bandwidth * bandwidth));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silu(double x) { return x * sigmoid(x); }

double silu_derivative(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace cvkan
