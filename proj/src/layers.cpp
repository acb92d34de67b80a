#include "cvkan/layers.hpp"

#include <cmath>

#include "cvkan/errors.hpp"

namespace cvkan {

namespace {

void check_width(const ComplexBatch& x, std::size_t expected, const char* what) {
  if (x.cols() != expected) {
    throw ShapeError(std::string(what) + ": input width " + std::to_string(x.cols()) +
                     " does not match layer width " + std::to_string(expected));
  }
}

}  // namespace

// exp(-|x - g_uv|^2 / bw^2) = ar[u] * ai[v]; d* are the derivatives w.r.t. Re x / Im x.
struct CvkanLayer::Basis {
  std::vector<double> ar, ai, dar, dai;
  double sr = 0.0, si = 0.0, dsr = 0.0, dsi = 0.0;
};

CvkanLayer::CvkanLayer(std::size_t in, std::size_t out, GridSpec grid, CsiluVariant csilu,
                       OutputDomain domain)
    : in_(in), out_(out), grid_(grid), csilu_(csilu), domain_(domain) {
  if (in == 0 || out == 0) throw ConfigError("layer widths must be positive");
  axis_ = make_grid_1d(grid_);
  stride_ = edge_param_count(grid_.points, domain_);
}

std::size_t CvkanLayer::rbf_count() const {
  const auto g2 = axis_.size() * axis_.size();
  return domain_ == OutputDomain::complex ? 2 * g2 : g2;
}

void CvkanLayer::compute_basis(Complex x, Basis& b, bool with_derivative) const {
  const std::size_t g = axis_.size();
  const double inv_bw2 = 1.0 / (grid_.bandwidth * grid_.bandwidth);
  b.ar.resize(g);
  b.ai.resize(g);
  for (std::size_t u = 0; u < g; ++u) {
    const double dr = x.real() - axis_[u];
    const double di = x.imag() - axis_[u];
    b.ar[u] = std::exp(-dr * dr * inv_bw2);
    b.ai[u] = std::exp(-di * di * inv_bw2);
  }
  b.sr = silu(x.real());
  b.si = silu(x.imag());
  if (with_derivative) {
    b.dar.resize(g);
    b.dai.resize(g);
    for (std::size_t u = 0; u < g; ++u) {
      b.dar[u] = -2.0 * (x.real() - axis_[u]) * inv_bw2 * b.ar[u];
      b.dai[u] = -2.0 * (x.imag() - axis_[u]) * inv_bw2 * b.ai[u];
    }
    b.dsr = silu_derivative(x.real());
    b.dsi = silu_derivative(x.imag());
  }
}

void CvkanLayer::init(std::span<double> params, std::mt19937_64& rng) const {
  if (params.size() != param_count()) throw ShapeError("CvkanLayer::init: parameter span size");
  std::normal_distribution<double> normal(0.0, 1.0 / grid_.points);
  const std::size_t nrbf = rbf_count();
  for (std::size_t e = 0; e < in_ * out_; ++e) {
    auto block = params.subspan(e * stride_, stride_);
    for (std::size_t k = 0; k < nrbf; ++k) block[k] = normal(rng);
    auto res = block.subspan(nrbf);
    res[0] = 1.0;
    res[1] = csilu_ == CsiluVariant::complex_weight ? 0.0 : 1.0;
    for (std::size_t k = 2; k < res.size(); ++k) res[k] = 0.0;
  }
}

namespace {

// Evaluates one edge given its precomputed basis.
struct EdgeEval {
  std::size_t g;
  OutputDomain domain;
  CsiluVariant variant;

  template <class B>
  Complex operator()(std::span<const double> block, const B& b) const {
    double re = 0.0;
    double im = 0.0;
    if (domain == OutputDomain::complex) {
      for (std::size_t u = 0; u < g; ++u) {
        const double* w = block.data() + 2 * u * g;
        double tr = 0.0;
        double ti = 0.0;
        for (std::size_t v = 0; v < g; ++v) {
          tr += w[2 * v] * b.ai[v];
          ti += w[2 * v + 1] * b.ai[v];
        }
        re += b.ar[u] * tr;
        im += b.ar[u] * ti;
      }
      const double* r = block.data() + 2 * g * g;
      if (variant == CsiluVariant::complex_weight) {
        re += r[0] * b.sr - r[1] * b.si + r[2];
        im += r[0] * b.si + r[1] * b.sr + r[3];
      } else {
        re += r[0] * b.sr + r[2];
        im += r[1] * b.si + r[3];
      }
      return {re, im};
    }
    for (std::size_t u = 0; u < g; ++u) {
      const double* w = block.data() + u * g;
      double t = 0.0;
      for (std::size_t v = 0; v < g; ++v) t += w[v] * b.ai[v];
      re += b.ar[u] * t;
    }
    const double* r = block.data() + g * g;
    if (variant == CsiluVariant::complex_weight) {
      re += r[0] * b.sr - r[1] * b.si + r[2];
    } else {
      re += r[0] * b.sr + r[1] * b.si + r[2];
    }
    return {re, 0.0};
  }
};

}  // namespace

ComplexBatch CvkanLayer::forward(const ComplexBatch& x, std::span<const double> params) const {
  check_width(x, in_, "CvkanLayer::forward");
  if (params.size() != param_count()) throw ShapeError("CvkanLayer::forward: parameter span size");
  ComplexBatch y(x.rows(), out_);
  const EdgeEval eval{axis_.size(), domain_, csilu_};
  Basis b;
  for (std::size_t s = 0; s < x.rows(); ++s) {
    for (std::size_t p = 0; p < in_; ++p) {
      compute_basis(x(s, p), b, false);
      for (std::size_t q = 0; q < out_; ++q) {
        const Complex v = eval(params.subspan((q * in_ + p) * stride_, stride_), b);
        y(s, q) = complex_add(y(s, q), v);
      }
    }
  }
  return y;
}

std::vector<Complex> CvkanLayer::edge_outputs(const ComplexBatch& x, std::span<const double> params) const {
  check_width(x, in_, "CvkanLayer::edge_outputs");
  std::vector<Complex> out(x.rows() * out_ * in_);
  const EdgeEval eval{axis_.size(), domain_, csilu_};
  Basis b;
  for (std::size_t s = 0; s < x.rows(); ++s) {
    for (std::size_t p = 0; p < in_; ++p) {
      compute_basis(x(s, p), b, false);
      for (std::size_t q = 0; q < out_; ++q) {
        out[(s * out_ + q) * in_ + p] = eval(params.subspan((q * in_ + p) * stride_, stride_), b);
      }
    }
  }
  return out;
}

ComplexBatch CvkanLayer::backward(const ComplexBatch& x, const ComplexBatch& grad_out,
                                  std::span<const double> params, std::span<double> grad_params) const {
  check_width(x, in_, "CvkanLayer::backward");
  if (grad_out.rows() != x.rows() || grad_out.cols() != out_) {
    throw ShapeError("CvkanLayer::backward: gradient shape does not match the output");
  }
  if (params.size() != param_count() || grad_params.size() != param_count()) {
    throw ShapeError("CvkanLayer::backward: parameter span size");
  }
  const std::size_t g = axis_.size();
  ComplexBatch gx(x.rows(), in_);
  Basis b;
  for (std::size_t s = 0; s < x.rows(); ++s) {
    for (std::size_t p = 0; p < in_; ++p) {
      compute_basis(x(s, p), b, true);
      double gxr = 0.0;
      double gxi = 0.0;
      for (std::size_t q = 0; q < out_; ++q) {
        const double gor = grad_out(s, q).real();
        const double goi = grad_out(s, q).imag();
        const std::size_t base = (q * in_ + p) * stride_;
        const double* w = params.data() + base;
        double* gw = grad_params.data() + base;
        if (domain_ == OutputDomain::complex) {
          double re_dxr = 0.0, im_dxr = 0.0, re_dxi = 0.0, im_dxi = 0.0;
          for (std::size_t u = 0; u < g; ++u) {
            const double* wu = w + 2 * u * g;
            double* gwu = gw + 2 * u * g;
            const double a_re = b.ar[u] * gor;
            const double a_im = b.ar[u] * goi;
            double pr = 0.0, pi = 0.0, qr = 0.0, qi = 0.0;
            for (std::size_t v = 0; v < g; ++v) {
              pr += wu[2 * v] * b.ai[v];
              pi += wu[2 * v + 1] * b.ai[v];
              qr += wu[2 * v] * b.dai[v];
              qi += wu[2 * v + 1] * b.dai[v];
              gwu[2 * v] += a_re * b.ai[v];
              gwu[2 * v + 1] += a_im * b.ai[v];
            }
            re_dxr += b.dar[u] * pr;
            im_dxr += b.dar[u] * pi;
            re_dxi += b.ar[u] * qr;
            im_dxi += b.ar[u] * qi;
          }
          gxr += gor * re_dxr + goi * im_dxr;
          gxi += gor * re_dxi + goi * im_dxi;
          const double* r = w + 2 * g * g;
          double* gr = gw + 2 * g * g;
          if (csilu_ == CsiluVariant::complex_weight) {
            gr[0] += gor * b.sr + goi * b.si;
            gr[1] += -gor * b.si + goi * b.sr;
            gxr += (gor * r[0] + goi * r[1]) * b.dsr;
            gxi += (-gor * r[1] + goi * r[0]) * b.dsi;
          } else {
            gr[0] += gor * b.sr;
            gr[1] += goi * b.si;
            gxr += gor * r[0] * b.dsr;
            gxi += goi * r[1] * b.dsi;
          }
          gr[2] += gor;
          gr[3] += goi;
        } else {
          double dxr = 0.0, dxi = 0.0;
          for (std::size_t u = 0; u < g; ++u) {
            const double* wu = w + u * g;
            double* gwu = gw + u * g;
            const double a = b.ar[u] * gor;
            double pr = 0.0, qr = 0.0;
            for (std::size_t v = 0; v < g; ++v) {
              pr += wu[v] * b.ai[v];
              qr += wu[v] * b.dai[v];
              gwu[v] += a * b.ai[v];
            }
            dxr += b.dar[u] * pr;
            dxi += b.ar[u] * qr;
          }
          gxr += gor * dxr;
          gxi += gor * dxi;
          const double* r = w + g * g;
          double* gr = gw + g * g;
          if (csilu_ == CsiluVariant::complex_weight) {
            gr[0] += gor * b.sr;
            gr[1] += -gor * b.si;
            gxr += gor * r[0] * b.dsr;
            gxi += -gor * r[1] * b.dsi;
          } else {
            gr[0] += gor * b.sr;
            gr[1] += gor * b.si;
            gxr += gor * r[0] * b.dsr;
            gxi += gor * r[1] * b.dsi;
          }
          gr[2] += gor;
        }
      }
      gx(s, p) = {gxr, gxi};
    }
  }
  return gx;
}

EdgeFunction CvkanLayer::edge(std::size_t q, std::size_t p, std::span<const double> params) const {
  if (q >= out_ || p >= in_) throw ShapeError("edge index out of range");
  const std::size_t g2 = axis_.size() * axis_.size();
  auto block = params.subspan((q * in_ + p) * stride_, stride_);
  EdgeFunction e;
  e.grid = grid_;
  e.output_domain = domain_;
  e.csilu.variant = csilu_;
  e.weights.resize(g2);
  const bool cplx = domain_ == OutputDomain::complex;
  for (std::size_t k = 0; k < g2; ++k) {
    e.weights[k] = cplx ? Complex(block[2 * k], block[2 * k + 1]) : Complex(block[k], 0.0);
  }
  auto r = block.subspan(cplx ? 2 * g2 : g2);
  if (csilu_ == CsiluVariant::complex_weight) {
    e.csilu.w_c = {r[0], r[1]};
  } else {
    e.csilu.w_c = {};
    e.csilu.w1 = r[0];
    e.csilu.w2 = r[1];
  }
  e.csilu.beta = {r[2], cplx ? r[3] : 0.0};
  return e;
}

void CvkanLayer::set_edge(std::size_t q, std::size_t p, const EdgeFunction& e, std::span<double> params) const {
  if (q >= out_ || p >= in_) throw ShapeError("edge index out of range");
  if (!(e.grid == grid_) || e.output_domain != domain_ || e.csilu.variant != csilu_) {
    throw ConfigError("edge configuration does not match the layer");
  }
  e.validate();
  const std::size_t g2 = axis_.size() * axis_.size();
  auto block = params.subspan((q * in_ + p) * stride_, stride_);
  const bool cplx = domain_ == OutputDomain::complex;
  for (std::size_t k = 0; k < g2; ++k) {
    if (cplx) {
      block[2 * k] = e.weights[k].real();
      block[2 * k + 1] = e.weights[k].imag();
    } else {
      block[k] = e.weights[k].real();
    }
  }
  auto r = block.subspan(cplx ? 2 * g2 : g2);
  if (csilu_ == CsiluVariant::complex_weight) {
    r[0] = e.csilu.w_c.real();
    r[1] = e.csilu.w_c.imag();
  } else {
    r[0] = e.csilu.w1;
    r[1] = e.csilu.w2;
  }
  r[2] = e.csilu.beta.real();
  if (cplx) r[3] = e.csilu.beta.imag();
}

// FastKAN baseline

FastKanLayer::FastKanLayer(std::size_t in, std::size_t out, GridSpec grid)
    : in_(in), out_(out), grid_(grid) {
  if (in == 0 || out == 0) throw ConfigError("layer widths must be positive");
  axis_ = make_grid_1d(grid_);
}

void FastKanLayer::init(std::span<double> params, std::mt19937_64& rng) const {
  if (params.size() != param_count()) throw ShapeError("FastKanLayer::init: parameter span size");
  std::normal_distribution<double> normal(0.0, 1.0 / grid_.points);
  const std::size_t g = axis_.size();
  for (std::size_t e = 0; e < in_ * out_; ++e) {
    auto block = params.subspan(e * edge_stride(), edge_stride());
    for (std::size_t i = 0; i < g; ++i) block[i] = normal(rng);
    block[g] = 1.0;
  }
  for (std::size_t q = 0; q < out_; ++q) params[in_ * out_ * edge_stride() + q] = 0.0;
}

ComplexBatch FastKanLayer::forward(const ComplexBatch& x, std::span<const double> params) const {
  check_width(x, in_, "FastKanLayer::forward");
  const std::size_t g = axis_.size();
  const double inv_bw2 = 1.0 / (grid_.bandwidth * grid_.bandwidth);
  const double* bias = params.data() + in_ * out_ * edge_stride();
  ComplexBatch y(x.rows(), out_);
  std::vector<double> phi(g);
  for (std::size_t s = 0; s < x.rows(); ++s) {
    for (std::size_t q = 0; q < out_; ++q) y(s, q) = {bias[q], 0.0};
    for (std::size_t p = 0; p < in_; ++p) {
      const double xv = x(s, p).real();
      for (std::size_t i = 0; i < g; ++i) {
        const double d = xv - axis_[i];
        phi[i] = std::exp(-d * d * inv_bw2);
      }
      const double sx = silu(xv);
      for (std::size_t q = 0; q < out_; ++q) {
        const double* w = params.data() + (q * in_ + p) * edge_stride();
        double sum = w[g] * sx;
        for (std::size_t i = 0; i < g; ++i) sum += w[i] * phi[i];
        y(s, q) = {y(s, q).real() + sum, 0.0};
      }
    }
  }
  return y;
}

std::vector<Complex> FastKanLayer::edge_outputs(const ComplexBatch& x, std::span<const double> params) const {
  check_width(x, in_, "FastKanLayer::edge_outputs");
  std::vector<Complex> out(x.rows() * out_ * in_);
  for (std::size_t s = 0; s < x.rows(); ++s) {
    for (std::size_t p = 0; p < in_; ++p) {
      for (std::size_t q = 0; q < out_; ++q) {
        auto block = params.subspan((q * in_ + p) * edge_stride(), edge_stride());
        const double v = real_edge_forward(x(s, p).real(), block.first(axis_.size()), grid_, block[axis_.size()]);
        out[(s * out_ + q) * in_ + p] = {v, 0.0};
      }
    }
  }
  return out;
}

ComplexBatch FastKanLayer::backward(const ComplexBatch& x, const ComplexBatch& grad_out,
                                    std::span<const double> params, std::span<double> grad_params) const {
  check_width(x, in_, "FastKanLayer::backward");
  const std::size_t g = axis_.size();
  const double inv_bw2 = 1.0 / (grid_.bandwidth * grid_.bandwidth);
  double* gbias = grad_params.data() + in_ * out_ * edge_stride();
  ComplexBatch gx(x.rows(), in_);
  std::vector<double> phi(g), dphi(g);
  for (std::size_t s = 0; s < x.rows(); ++s) {
    for (std::size_t q = 0; q < out_; ++q) gbias[q] += grad_out(s, q).real();
    for (std::size_t p = 0; p < in_; ++p) {
      const double xv = x(s, p).real();
      for (std::size_t i = 0; i < g; ++i) {
        const double d = xv - axis_[i];
        phi[i] = std::exp(-d * d * inv_bw2);
        dphi[i] = -2.0 * d * inv_bw2 * phi[i];
      }
      const double sx = silu(xv);
      const double dsx = silu_derivative(xv);
      double gxp = 0.0;
      for (std::size_t q = 0; q < out_; ++q) {
        const double go = grad_out(s, q).real();
        const std::size_t base = (q * in_ + p) * edge_stride();
        const double* w = params.data() + base;
        double* gw = grad_params.data() + base;
        double deriv = w[g] * dsx;
        for (std::size_t i = 0; i < g; ++i) {
          gw[i] += go * phi[i];
          deriv += w[i] * dphi[i];
        }
        gw[g] += go * sx;
        gxp += go * deriv;
      }
      gx(s, p) = {gxp, 0.0};
    }
  }
  return gx;
}

}  // namespace cvkan
