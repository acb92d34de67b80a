#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cvkan {

class Tape;

/// Handle to a scalar node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;

  double value() const;
  std::uint32_t index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

/// Reverse-mode recorder over real scalars.
///
/// Complex quantities are carried as separate real and imaginary Vars, so every
/// recorded operation is real-valued. Each node keeps at most two parents.
class Tape {
 public:
  Var variable(double value);

  /// Records a unary or binary node with its local partial derivatives. Throws
  /// GradientError if the value or a partial is not finite.
  Var record(const char* op, double value, Var a, double da);
  Var record(const char* op, double value, Var a, double da, Var b, double db);

  double value(Var v) const { return nodes_[v.index()].value; }
  std::size_t size() const { return nodes_.size(); }

  /// d(output)/d(v) for every v in wrt.
  std::vector<double> gradient(Var output, std::span<const Var> wrt) const;

 private:
  static constexpr std::uint32_t kNone = UINT32_MAX;

  struct Node {
    double value;
    std::uint32_t lhs;
    std::uint32_t rhs;
    double dlhs;
    double drhs;
  };

  std::vector<Node> nodes_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, double b);
Var operator/(double a, Var b);

Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
Var sigmoid(Var a);

/// A loss written directly in tape operations.
using TapeFunction = std::function<Var(Tape&, std::span<const Var>)>;

/// A loss whose gradient is provided by hand-derived backward passes (the model path).
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> params) = 0;
  virtual double value_and_gradient(std::span<const double> params, std::span<double> gradient) = 0;
};

/// d(loss)/d(params). Non-finite intermediates raise GradientError naming the operation.
std::vector<double> grad(const TapeFunction& loss_fn, std::span<const double> params);
std::vector<double> grad(Objective& loss_fn, std::span<const double> params);

}  // namespace cvkan
