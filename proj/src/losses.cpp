#include "cvkan/losses.hpp"

#include <cmath>
#include <string>

#include "cvkan/errors.hpp"

namespace cvkan {

namespace {

void check_same_shape(const ComplexBatch& a, const ComplexBatch& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": prediction and target shapes differ");
  }
}

void check_labels(const ComplexBatch& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) throw ShapeError("one label per logit row is required");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) {
      throw ShapeError("label " + std::to_string(y) + " outside [0, " + std::to_string(logits.cols()) + ")");
    }
  }
}

// Softmax of row r over real parts, computed with the max shift.
void softmax_row(const ComplexBatch& logits, std::size_t r, std::vector<double>& out, double& log_norm) {
  const std::size_t c = logits.cols();
  double mx = logits(r, 0).real();
  for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, logits(r, k).real());
  double sum = 0.0;
  out.resize(c);
  for (std::size_t k = 0; k < c; ++k) {
    out[k] = std::exp(logits(r, k).real() - mx);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
  log_norm = mx + std::log(sum);
}

}  // namespace

double loss_mse(const ComplexBatch& pred, const ComplexBatch& target) {
  check_same_shape(pred, target, "loss_mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data().size(); ++i) {
    sum += complex_abs2(pred.data()[i] - target.data()[i]);
  }
  return sum / static_cast<double>(pred.data().size());
}

double loss_mae(const ComplexBatch& pred, const ComplexBatch& target) {
  check_same_shape(pred, target, "loss_mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data().size(); ++i) sum += std::abs(pred.data()[i] - target.data()[i]);
  return sum / static_cast<double>(pred.data().size());
}

ComplexBatch loss_mse_grad(const ComplexBatch& pred, const ComplexBatch& target) {
  check_same_shape(pred, target, "loss_mse_grad");
  ComplexBatch g(pred.rows(), pred.cols());
  const double scale = 2.0 / static_cast<double>(pred.data().size());
  for (std::size_t i = 0; i < pred.data().size(); ++i) {
    g.data()[i] = (pred.data()[i] - target.data()[i]) * scale;
  }
  return g;
}

ComplexBatch loss_mae_grad(const ComplexBatch& pred, const ComplexBatch& target) {
  check_same_shape(pred, target, "loss_mae_grad");
  ComplexBatch g(pred.rows(), pred.cols());
  const double scale = 1.0 / static_cast<double>(pred.data().size());
  for (std::size_t i = 0; i < pred.data().size(); ++i) {
    const Complex r = pred.data()[i] - target.data()[i];
    const double m = std::abs(r);
    g.data()[i] = m == 0.0 ? Complex{} : r * (scale / m);
  }
  return g;
}

double loss_ce(const ComplexBatch& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  double sum = 0.0;
  std::vector<double> prob;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double log_norm = 0.0;
    softmax_row(logits, r, prob, log_norm);
    sum += log_norm - logits(r, static_cast<std::size_t>(labels[r])).real();
  }
  return sum / static_cast<double>(logits.rows());
}

ComplexBatch loss_ce_grad(const ComplexBatch& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  ComplexBatch g(logits.rows(), logits.cols());
  std::vector<double> prob;
  const double scale = 1.0 / static_cast<double>(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    double log_norm = 0.0;
    softmax_row(logits, r, prob, log_norm);
    for (std::size_t k = 0; k < logits.cols(); ++k) {
      const double target = static_cast<std::size_t>(labels[r]) == k ? 1.0 : 0.0;
      g(r, k) = {(prob[k] - target) * scale, 0.0};
    }
  }
  return g;
}

double metric_accuracy(const ComplexBatch& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.cols(); ++k) {
      if (logits(r, k).real() > logits(r, best).real()) best = k;
    }
    if (best == static_cast<std::size_t>(labels[r])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

}  // namespace cvkan
