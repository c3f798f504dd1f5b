#pragma once

#include <cstddef>
#include <span>

namespace fnd {

// Positive class is fake (label 1).
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  void add(int predicted, int actual);
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision and recall are 0 when their denominator is 0, and so is f1 when
// precision + recall is 0. Throws ContractError on an empty matrix.
Metrics compute_metrics(const ConfusionMatrix& cm);

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual);

// Probabilities are thresholded at 0.5 (p >= 0.5 -> fake).
ConfusionMatrix confusion_from_proba(std::span<const double> proba, std::span<const int> actual);

}  // namespace fnd
