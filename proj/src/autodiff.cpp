#include "cvkan/autodiff.hpp"

#include <cmath>
#include <string>

#include "cvkan/errors.hpp"

namespace cvkan {

namespace {

Tape& tape_of(Var a) {
  if (a.tape() == nullptr) throw GradientError("operation on a detached variable");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  if (a.tape() != b.tape()) throw GradientError("operands recorded on different tapes");
  return tape_of(a);
}

}  // namespace

double Var::value() const { return tape_of(*this).value(*this); }

Var Tape::variable(double value) {
  if (!std::isfinite(value)) throw GradientError("non-finite value in 'variable'");
  nodes_.push_back({value, kNone, kNone, 0.0, 0.0});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(const char* op, double value, Var a, double da) {
  if (!std::isfinite(value) || !std::isfinite(da)) {
    throw GradientError(std::string("non-finite intermediate in '") + op + "'");
  }
  nodes_.push_back({value, a.index(), kNone, da, 0.0});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(const char* op, double value, Var a, double da, Var b, double db) {
  if (!std::isfinite(value) || !std::isfinite(da) || !std::isfinite(db)) {
    throw GradientError(std::string("non-finite intermediate in '") + op + "'");
  }
  nodes_.push_back({value, a.index(), b.index(), da, db});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

std::vector<double> Tape::gradient(Var output, std::span<const Var> wrt) const {
  std::vector<double> adjoint(nodes_.size(), 0.0);
  adjoint[output.index()] = 1.0;
  for (std::size_t i = output.index() + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    const double a = adjoint[i];
    if (a == 0.0) continue;
    if (n.lhs != kNone) adjoint[n.lhs] += a * n.dlhs;
    if (n.rhs != kNone) adjoint[n.rhs] += a * n.drhs;
  }
  std::vector<double> out;
  out.reserve(wrt.size());
  for (Var v : wrt) out.push_back(adjoint[v.index()]);
  return out;
}

Var operator+(Var a, Var b) { return tape_of(a, b).record("add", a.value() + b.value(), a, 1.0, b, 1.0); }
Var operator-(Var a, Var b) { return tape_of(a, b).record("sub", a.value() - b.value(), a, 1.0, b, -1.0); }
Var operator*(Var a, Var b) {
  return tape_of(a, b).record("mul", a.value() * b.value(), a, b.value(), b, a.value());
}
Var operator/(Var a, Var b) {
  const double bv = b.value();
  const double q = a.value() / bv;
  return tape_of(a, b).record("div", q, a, 1.0 / bv, b, -q / bv);
}
Var operator-(Var a) { return tape_of(a).record("neg", -a.value(), a, -1.0); }
Var operator+(Var a, double b) { return tape_of(a).record("add", a.value() + b, a, 1.0); }
Var operator+(double a, Var b) { return b + a; }
Var operator-(Var a, double b) { return tape_of(a).record("sub", a.value() - b, a, 1.0); }
Var operator-(double a, Var b) { return tape_of(b).record("sub", a - b.value(), b, -1.0); }
Var operator*(Var a, double b) { return tape_of(a).record("mul", a.value() * b, a, b); }
Var operator*(double a, Var b) { return b * a; }
Var operator/(Var a, double b) { return tape_of(a).record("div", a.value() / b, a, 1.0 / b); }
Var operator/(double a, Var b) {
  const double bv = b.value();
  return tape_of(b).record("div", a / bv, b, -a / (bv * bv));
}

Var exp(Var a) {
  const double e = std::exp(a.value());
  return tape_of(a).record("exp", e, a, e);
}
Var log(Var a) { return tape_of(a).record("log", std::log(a.value()), a, 1.0 / a.value()); }
Var sqrt(Var a) {
  const double s = std::sqrt(a.value());
  return tape_of(a).record("sqrt", s, a, 0.5 / s);
}
Var square(Var a) { return tape_of(a).record("square", a.value() * a.value(), a, 2.0 * a.value()); }
Var sigmoid(Var a) {
  const double s = 1.0 / (1.0 + std::exp(-a.value()));
  return tape_of(a).record("sigmoid", s, a, s * (1.0 - s));
}

std::vector<double> grad(const TapeFunction& loss_fn, std::span<const double> params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (double p : params) vars.push_back(tape.variable(p));
  Var loss = loss_fn(tape, vars);
  if (loss.tape() != &tape) {
    // A constant loss: nothing depends on the parameters.
    return std::vector<double>(params.size(), 0.0);
  }
  return tape.gradient(loss, vars);
}

std::vector<double> grad(Objective& loss_fn, std::span<const double> params) {
  if (params.size() != loss_fn.dimension()) {
    throw GradientError("parameter vector length does not match the objective");
  }
  std::vector<double> g(params.size(), 0.0);
  const double value = loss_fn.value_and_gradient(params, g);
  if (!std::isfinite(value)) throw GradientError("non-finite loss value");
  return g;
}

}  // namespace cvkan
