#include "fnd/metrics.hpp"

#include <string>

#include "fnd/errors.hpp"

namespace fnd {

void ConfusionMatrix::add(int predicted, int actual) {
  if ((predicted != 0 && predicted != 1) || (actual != 0 && actual != 1)) {
    throw ContractError("confusion matrix entries must be 0 or 1");
  }
  if (predicted == 1) {
    ++(actual == 1 ? tp : fp);
  } else {
    ++(actual == 1 ? fn : tn);
  }
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw ContractError("compute_metrics: empty confusion matrix");
  Metrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
  if (cm.tp + cm.fp > 0) m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn > 0) m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw DimensionError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                         std::to_string(actual.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) cm.add(predicted[i], actual[i]);
  return cm;
}

ConfusionMatrix confusion_from_proba(std::span<const double> proba, std::span<const int> actual) {
  if (proba.size() != actual.size()) {
    throw DimensionError("confusion: " + std::to_string(proba.size()) + " probabilities for " +
                         std::to_string(actual.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < proba.size(); ++i) cm.add(proba[i] >= 0.5 ? 1 : 0, actual[i]);
  return cm;
}

}  // namespace fnd
