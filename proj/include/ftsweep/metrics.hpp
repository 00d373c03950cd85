#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "ftsweep/catalog.hpp"
#include "ftsweep/errors.hpp"

namespace ftsweep {

/// Confusion counts indexed [true class][predicted class].
using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

inline Confusion make_confusion(std::span<const ObjectClass> truth,
                                std::span<const ObjectClass> predicted) {
  if (truth.size() != predicted.size()) {
    throw ShapeMismatchError("confusion inputs differ in length");
  }
  Confusion m{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])] += 1;
  }
  return m;
}

inline std::size_t confusion_total(const Confusion& m) {
  std::size_t total = 0;
  for (const auto& row : m) {
    for (const auto v : row) total += v;
  }
  return total;
}

inline double accuracy(const Confusion& m) {
  const std::size_t total = confusion_total(m);
  if (total == 0) throw EmptyConfusionError("accuracy of an empty confusion matrix");
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) correct += m[c][c];
  return static_cast<double>(correct) / static_cast<double>(total);
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-class precision/recall/F1. A zero denominator yields 0 rather than NaN.
inline ClassMetrics class_metrics(const Confusion& m, std::size_t c) {
  if (confusion_total(m) == 0) throw EmptyConfusionError("metrics of an empty confusion matrix");
  const double tp = static_cast<double>(m[c][c]);
  double pred_c = 0.0, true_c = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    pred_c += static_cast<double>(m[i][c]);
    true_c += static_cast<double>(m[c][i]);
  }
  ClassMetrics out;
  out.precision = pred_c > 0.0 ? tp / pred_c : 0.0;
  out.recall = true_c > 0.0 ? tp / true_c : 0.0;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

inline ClassMetrics macro_metrics(const Confusion& m) {
  ClassMetrics sum;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const ClassMetrics cm = class_metrics(m, c);
    sum.precision += cm.precision;
    sum.recall += cm.recall;
    sum.f1 += cm.f1;
  }
  sum.precision /= kNumClasses;
  sum.recall /= kNumClasses;
  sum.f1 /= kNumClasses;
  return sum;
}

}  // namespace ftsweep
