#pragma once

#include <span>

#include "cvkan/complex.hpp"

namespace cvkan {

/// mean over samples and outputs of |pred - target|^2
double loss_mse(const ComplexBatch& pred, const ComplexBatch& target);
/// mean of |pred - target|
double loss_mae(const ComplexBatch& pred, const ComplexBatch& target);

/// d(mse)/d(pred), with d/dRe in the real slot and d/dIm in the imaginary slot.
ComplexBatch loss_mse_grad(const ComplexBatch& pred, const ComplexBatch& target);
/// Zero where the residual is exactly zero.
ComplexBatch loss_mae_grad(const ComplexBatch& pred, const ComplexBatch& target);

/// Softmax cross-entropy over the real parts of the logits, averaged over samples.
double loss_ce(const ComplexBatch& logits, std::span<const int> labels);
ComplexBatch loss_ce_grad(const ComplexBatch& logits, std::span<const int> labels);

/// Fraction of rows whose arg-max (first on ties) equals the label.
double metric_accuracy(const ComplexBatch& logits, std::span<const int> labels);

}  // namespace cvkan
