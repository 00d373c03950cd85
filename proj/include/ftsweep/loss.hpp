#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "ftsweep/catalog.hpp"
#include "ftsweep/errors.hpp"

namespace ftsweep {

constexpr double kProbClip = 1e-7;
constexpr double kDistributionTolerance = 1e-6;

/// Class-weighted categorical cross-entropy, averaged over the batch:
/// mean_i w[y_i] * (-log p_i[y_i]), with probabilities clipped to
/// [1e-7, 1]. `probs` is row-major (rows * num_classes) and each row must
/// be a distribution within tolerance.
template <class T>
double weighted_cross_entropy(std::span<const T> probs, std::span<const ObjectClass> labels,
                              const WeightMap& weights,
                              std::size_t num_classes = kNumClasses) {
  const std::size_t rows = labels.size();
  if (rows == 0) throw EmptyDatasetError("cross entropy over an empty batch");
  if (probs.size() != rows * num_classes) {
    throw ShapeMismatchError("probability matrix is " + std::to_string(probs.size()) +
                             " values, expected " + std::to_string(rows * num_classes));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      row_sum += static_cast<double>(probs[i * num_classes + c]);
    }
    if (std::abs(row_sum - 1.0) > kDistributionTolerance) {
      throw InvalidDistributionError("row " + std::to_string(i) + " sums to " +
                                     std::to_string(row_sum));
    }
    const auto y = static_cast<std::size_t>(labels[i]);
    double p = static_cast<double>(probs[i * num_classes + y]);
    p = std::min(1.0, std::max(kProbClip, p));
    total += weights.for_class(labels[i]) * -std::log(p);
  }
  return total / static_cast<double>(rows);
}

/// Gradient of the batch-mean weighted cross-entropy with respect to the
/// logits, given softmax probabilities: row i gets w[y_i] * (p_i - onehot_i) / n.
/// Written into `dlogits`, which must match `probs` in shape.
template <class T>
void weighted_cross_entropy_grad(std::span<const T> probs, std::span<const ObjectClass> labels,
                                 const WeightMap& weights, std::span<T> dlogits,
                                 std::size_t num_classes = kNumClasses) {
  const std::size_t rows = labels.size();
  if (probs.size() != rows * num_classes || dlogits.size() != probs.size()) {
    throw ShapeMismatchError("gradient buffers disagree with the probability matrix");
  }
  const T inv_n = static_cast<T>(1.0 / static_cast<double>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const T w = static_cast<T>(weights.for_class(labels[i]));
    for (std::size_t c = 0; c < num_classes; ++c) {
      const T target = c == y ? T(1) : T(0);
      dlogits[i * num_classes + c] = w * (probs[i * num_classes + c] - target) * inv_n;
    }
  }
}

}  // namespace ftsweep
