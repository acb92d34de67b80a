#include "cvkan/norm.hpp"

#include <cmath>
#include <string>

#include "cvkan/errors.hpp"

namespace cvkan {

std::string_view to_string(NormVariant v) {
  switch (v) {
    case NormVariant::none: return "none";
    case NormVariant::bn_c: return "bn_c";
    case NormVariant::bn_v: return "bn_v";
    case NormVariant::bn_r2: return "bn_r2";
    case NormVariant::bn_real: return "bn_real";
  }
  return "none";
}

NormVariant parse_norm_variant(std::string_view s) {
  if (s == "none") return NormVariant::none;
  if (s == "bn_c") return NormVariant::bn_c;
  if (s == "bn_v") return NormVariant::bn_v;
  if (s == "bn_r2") return NormVariant::bn_r2;
  if (s == "bn_real") return NormVariant::bn_real;
  throw ConfigError("unknown normalization '" + std::string(s) + "' (expected none|bn_c|bn_v|bn_r2|bn_real)");
}

std::size_t norm_params_per_feature(NormVariant v) {
  switch (v) {
    case NormVariant::none: return 0;
    case NormVariant::bn_c: return 5;
    case NormVariant::bn_v: return 3;
    case NormVariant::bn_r2: return 4;
    case NormVariant::bn_real: return 2;
  }
  return 0;
}

Sym2 inverse_sqrt_sym2(double a, double b, double c) {
  const double s = std::sqrt(a * c - b * b);
  const double t = std::sqrt(a + c + 2.0 * s);
  const double d = s * t;
  return {(c + s) / d, -b / d, (a + s) / d};
}

namespace {

// Vector-Jacobian product of inverse_sqrt_sym2: given dL/dW (with the off-diagonal entry
// counted once for the shared scalar), returns dL/d(a, b, c).
Sym2 inverse_sqrt_sym2_vjp(double a, double b, double c, const Sym2& gw) {
  const double s = std::sqrt(a * c - b * b);
  const double t = std::sqrt(a + c + 2.0 * s);
  const double d = s * t;
  const Sym2 w{(c + s) / d, -b / d, (a + s) / d};

  auto partial = [&](double da, double db, double dc) {
    const double ds = (c * da + a * dc) / (2.0 * s) - b * db / s;
    const double dt = (da + dc + 2.0 * ds) / (2.0 * t);
    const double dd = t * ds + s * dt;
    const double dw_rr = (dc + ds) / d - w.rr * dd / d;
    const double dw_ri = -db / d - w.ri * dd / d;
    const double dw_ii = (da + ds) / d - w.ii * dd / d;
    return gw.rr * dw_rr + gw.ri * dw_ri + gw.ii * dw_ii;
  };
  return {partial(1.0, 0.0, 0.0), partial(0.0, 1.0, 0.0), partial(0.0, 0.0, 1.0)};
}

// Stats slots per feature in the cache.
constexpr std::size_t kStatSlots = 6;

}  // namespace

NormLayer::NormLayer(NormVariant variant, std::size_t features, NormOptions options)
    : variant_(variant), features_(features), options_(options), running_(features) {
  if (features == 0) throw ConfigError("normalization needs at least one feature");
  if (!(options.momentum > 0.0 && options.momentum < 1.0)) {
    throw ConfigError("normalization momentum must lie in (0, 1)");
  }
  if (!(options.epsilon > 0.0)) throw ConfigError("normalization epsilon must be positive");
}

void NormLayer::init(std::span<double> params) const {
  if (params.size() != param_count()) throw ShapeError("NormLayer::init: parameter span size");
  const std::size_t k = norm_params_per_feature(variant_);
  for (std::size_t f = 0; f < features_; ++f) {
    auto p = params.subspan(f * k, k);
    switch (variant_) {
      case NormVariant::none: break;
      case NormVariant::bn_c: p[0] = 1.0; p[1] = 0.0; p[2] = 1.0; p[3] = 0.0; p[4] = 0.0; break;
      case NormVariant::bn_v: p[0] = 1.0; p[1] = 0.0; p[2] = 0.0; break;
      case NormVariant::bn_r2: p[0] = 1.0; p[1] = 0.0; p[2] = 1.0; p[3] = 0.0; break;
      case NormVariant::bn_real: p[0] = 1.0; p[1] = 0.0; break;
    }
  }
}

ComplexBatch NormLayer::forward(const ComplexBatch& x, std::span<const double> params, Mode mode) {
  if (x.cols() != features_) throw ShapeError("NormLayer: input width does not match the feature count");
  if (params.size() != param_count()) throw ShapeError("NormLayer: parameter span size");
  const std::size_t n = x.rows();
  if (variant_ == NormVariant::none) {
    cache_ = Cache{mode, n, {}, {}, {}};
    return x;
  }
  if (mode == Mode::train && n < 2) {
    throw StatisticsError("batch normalization needs at least 2 samples in train mode, got " +
                          std::to_string(n));
  }
  const double eps = options_.epsilon;
  const double m = options_.momentum;
  const std::size_t k = norm_params_per_feature(variant_);
  cache_.mode = mode;
  cache_.rows = n;
  cache_.centered.assign(n * features_, Complex{});
  cache_.normalized.assign(n * features_, Complex{});
  cache_.stats.assign(features_ * kStatSlots, 0.0);
  ComplexBatch y(n, features_);

  for (std::size_t f = 0; f < features_; ++f) {
    auto p = params.subspan(f * k, k);
    double* st = cache_.stats.data() + f * kStatSlots;
    RunningStats& run = running_[f];

    Complex mean = run.mean;
    double crr = 0.0, cri = 0.0, cii = 0.0;
    if (mode == Mode::train) {
      double sr = 0.0, si = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sr += x(i, f).real();
        si += x(i, f).imag();
      }
      mean = {sr / n, si / n};
      for (std::size_t i = 0; i < n; ++i) {
        const double dr = x(i, f).real() - mean.real();
        const double di = x(i, f).imag() - mean.imag();
        crr += dr * dr;
        cri += dr * di;
        cii += di * di;
      }
      crr /= n;
      cri /= n;
      cii /= n;
      run.mean = {(1.0 - m) * run.mean.real() + m * mean.real(), (1.0 - m) * run.mean.imag() + m * mean.imag()};
      switch (variant_) {
        case NormVariant::bn_c:
          run.cov_rr = (1.0 - m) * run.cov_rr + m * crr;
          run.cov_ri = (1.0 - m) * run.cov_ri + m * cri;
          run.cov_ii = (1.0 - m) * run.cov_ii + m * cii;
          break;
        case NormVariant::bn_v: run.var = (1.0 - m) * run.var + m * (crr + cii); break;
        case NormVariant::bn_r2:
          run.cov_rr = (1.0 - m) * run.cov_rr + m * crr;
          run.cov_ii = (1.0 - m) * run.cov_ii + m * cii;
          break;
        case NormVariant::bn_real: run.var = (1.0 - m) * run.var + m * crr; break;
        case NormVariant::none: break;
      }
    } else {
      crr = run.cov_rr;
      cri = run.cov_ri;
      cii = run.cov_ii;
      if (variant_ == NormVariant::bn_v) {
        crr = run.var;
        cii = 0.0;
      } else if (variant_ == NormVariant::bn_real) {
        crr = run.var;
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      cache_.centered[i * features_ + f] = {x(i, f).real() - mean.real(), x(i, f).imag() - mean.imag()};
    }

    switch (variant_) {
      case NormVariant::bn_c: {
        const double a = crr + eps, b = cri, c = cii + eps;
        const Sym2 w = inverse_sqrt_sym2(a, b, c);
        st[0] = a; st[1] = b; st[2] = c; st[3] = w.rr; st[4] = w.ri; st[5] = w.ii;
        for (std::size_t i = 0; i < n; ++i) {
          const Complex d = cache_.centered[i * features_ + f];
          const double zr = w.rr * d.real() + w.ri * d.imag();
          const double zi = w.ri * d.real() + w.ii * d.imag();
          cache_.normalized[i * features_ + f] = {zr, zi};
          y(i, f) = {p[0] * zr + p[1] * zi + p[3], p[1] * zr + p[2] * zi + p[4]};
        }
        break;
      }
      case NormVariant::bn_v: {
        const double var = crr + cii + eps;
        const double inv = 1.0 / std::sqrt(var);
        st[0] = var; st[1] = inv;
        for (std::size_t i = 0; i < n; ++i) {
          const Complex d = cache_.centered[i * features_ + f];
          const Complex z{d.real() * inv, d.imag() * inv};
          cache_.normalized[i * features_ + f] = z;
          y(i, f) = {p[0] * z.real() + p[1], p[0] * z.imag() + p[2]};
        }
        break;
      }
      case NormVariant::bn_r2: {
        const double inv_r = 1.0 / std::sqrt(crr + eps);
        const double inv_i = 1.0 / std::sqrt(cii + eps);
        st[0] = inv_r; st[1] = inv_i;
        for (std::size_t i = 0; i < n; ++i) {
          const Complex d = cache_.centered[i * features_ + f];
          const Complex z{d.real() * inv_r, d.imag() * inv_i};
          cache_.normalized[i * features_ + f] = z;
          y(i, f) = {p[0] * z.real() + p[1], p[2] * z.imag() + p[3]};
        }
        break;
      }
      case NormVariant::bn_real: {
        const double inv = 1.0 / std::sqrt(crr + eps);
        st[0] = inv;
        for (std::size_t i = 0; i < n; ++i) {
          const double z = cache_.centered[i * features_ + f].real() * inv;
          cache_.normalized[i * features_ + f] = {z, 0.0};
          y(i, f) = {p[0] * z + p[1], 0.0};
        }
        break;
      }
      case NormVariant::none: break;
    }
  }
  return y;
}

ComplexBatch NormLayer::apply_eval(const ComplexBatch& x, std::span<const double> params) const {
  NormLayer scratch(variant_, features_, options_);
  scratch.running_ = running_;
  return scratch.forward(x, params, Mode::eval);
}

ComplexBatch NormLayer::backward(const ComplexBatch& grad_out, std::span<const double> params,
                                 std::span<double> grad_params) const {
  if (grad_out.cols() != features_ || grad_out.rows() != cache_.rows) {
    throw ShapeError("NormLayer::backward: gradient shape does not match the last forward");
  }
  if (variant_ == NormVariant::none) return grad_out;
  const std::size_t n = cache_.rows;
  const bool train = cache_.mode == Mode::train;
  const std::size_t k = norm_params_per_feature(variant_);
  ComplexBatch gx(n, features_);
  std::vector<Complex> gd(n);

  for (std::size_t f = 0; f < features_; ++f) {
    auto p = params.subspan(f * k, k);
    auto gp = grad_params.subspan(f * k, k);
    const double* st = cache_.stats.data() + f * kStatSlots;
    auto centered = [&](std::size_t i) { return cache_.centered[i * features_ + f]; };
    auto normalized = [&](std::size_t i) { return cache_.normalized[i * features_ + f]; };

    switch (variant_) {
      case NormVariant::bn_c: {
        const Sym2 w{st[3], st[4], st[5]};
        Sym2 gw{0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
          const Complex go = grad_out(i, f);
          const Complex z = normalized(i);
          gp[0] += go.real() * z.real();
          gp[1] += go.real() * z.imag() + go.imag() * z.real();
          gp[2] += go.imag() * z.imag();
          gp[3] += go.real();
          gp[4] += go.imag();
          const double gzr = p[0] * go.real() + p[1] * go.imag();
          const double gzi = p[1] * go.real() + p[2] * go.imag();
          const Complex d = centered(i);
          gw.rr += gzr * d.real();
          gw.ri += gzr * d.imag() + gzi * d.real();
          gw.ii += gzi * d.imag();
          gd[i] = {w.rr * gzr + w.ri * gzi, w.ri * gzr + w.ii * gzi};
        }
        if (train) {
          const Sym2 gc = inverse_sqrt_sym2_vjp(st[0], st[1], st[2], gw);
          for (std::size_t i = 0; i < n; ++i) {
            const Complex d = centered(i);
            gd[i] += Complex((2.0 * gc.rr * d.real() + gc.ri * d.imag()) / n,
                             (gc.ri * d.real() + 2.0 * gc.ii * d.imag()) / n);
          }
        }
        break;
      }
      case NormVariant::bn_v: {
        const double inv = st[1];
        double gvar = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const Complex go = grad_out(i, f);
          const Complex z = normalized(i);
          gp[0] += go.real() * z.real() + go.imag() * z.imag();
          gp[1] += go.real();
          gp[2] += go.imag();
          const Complex gz{p[0] * go.real(), p[0] * go.imag()};
          const Complex d = centered(i);
          gvar += gz.real() * d.real() + gz.imag() * d.imag();
          gd[i] = {gz.real() * inv, gz.imag() * inv};
        }
        if (train) {
          gvar *= -0.5 * inv * inv * inv;
          for (std::size_t i = 0; i < n; ++i) gd[i] += centered(i) * (2.0 * gvar / n);
        }
        break;
      }
      case NormVariant::bn_r2:
      case NormVariant::bn_real: {
        const bool two = variant_ == NormVariant::bn_r2;
        const double inv_r = st[0];
        const double inv_i = two ? st[1] : 0.0;
        double mr = 0.0, mrz = 0.0, mi = 0.0, miz = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const Complex go = grad_out(i, f);
          const Complex z = normalized(i);
          const double gzr = p[0] * go.real();
          gp[0] += go.real() * z.real();
          gp[1] += go.real();
          mr += gzr;
          mrz += gzr * z.real();
          double gzi = 0.0;
          if (two) {
            gzi = p[2] * go.imag();
            gp[2] += go.imag() * z.imag();
            gp[3] += go.imag();
            mi += gzi;
            miz += gzi * z.imag();
          }
          gd[i] = {gzr, gzi};
        }
        mr /= n; mrz /= n; mi /= n; miz /= n;
        for (std::size_t i = 0; i < n; ++i) {
          const Complex z = normalized(i);
          if (train) {
            gd[i] = {inv_r * (gd[i].real() - mr - z.real() * mrz),
                     two ? inv_i * (gd[i].imag() - mi - z.imag() * miz) : 0.0};
          } else {
            gd[i] = {inv_r * gd[i].real(), inv_i * gd[i].imag()};
          }
        }
        // Already centred for the train path; skip the generic mean removal below.
        for (std::size_t i = 0; i < n; ++i) gx(i, f) = gd[i];
        continue;
      }
      case NormVariant::none: break;
    }

    Complex mean_gd{0.0, 0.0};
    if (train) {
      double sr = 0.0, si = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sr += gd[i].real();
        si += gd[i].imag();
      }
      mean_gd = {sr / n, si / n};
    }
    for (std::size_t i = 0; i < n; ++i) gx(i, f) = gd[i] - mean_gd;
  }
  return gx;
}

}  // namespace cvkan
