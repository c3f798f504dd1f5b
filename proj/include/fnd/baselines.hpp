#pragma once

// Supervised reference classifiers over bag-of-words counts.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fnd/dataset.hpp"
#include "fnd/text.hpp"

namespace fnd {

// Row-major dense design matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  void append(std::span<const double> row);
};

// Token counts of news and tweet text, indexed by vocabulary id. Unknown
// tokens are counted in the kUnknownId column; column kPadId stays 0.
std::vector<double> bag_of_words(const NewsRecord& record, const Vocabulary& vocab);

// Bag-of-words counts followed by the assembled auxiliary columns.
std::vector<double> baseline_row(const NewsRecord& record, const Vocabulary& vocab, const FeatureVector& assembled);

// ---- logistic regression --------------------------------------------------

struct LogRegOptions {
  double l2 = 1e-3;
  std::size_t epochs = 300;
  double learning_rate = 0.1;
  // Full-batch descent from zero weights uses no randomness; the seed is
  // carried for report provenance.
  std::uint64_t seed = 0;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  // Regularized objective before each epoch's update, then after the last.
  std::vector<double> loss_history;

  double predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
};

// Minimizes mean BCE + l2/2 * |w|^2 (bias unregularized) by gradient descent.
// Throws ContractError unless both classes are present.
LogisticModel train_logreg(const FeatureMatrix& x, std::span<const int> labels, const LogRegOptions& options);

// ---- multinomial naive Bayes ----------------------------------------------

struct NaiveBayesModel {
  double alpha = 1.0;
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_likelihood;

  std::array<double, 2> joint_log_likelihood(std::span<const double> counts) const;
  // Ties go to class 0.
  int predict(std::span<const double> counts) const;
};

// `token_counts[c][w]` is the total count of token w over class-c documents;
// `documents[c]` the number of class-c documents (for the priors).
NaiveBayesModel train_nb(const std::array<std::vector<double>, 2>& token_counts,
                         const std::array<double, 2>& documents, double alpha);

// Sums the rows of a count matrix per class, then trains as above.
NaiveBayesModel train_nb(const FeatureMatrix& counts, std::span<const int> labels, double alpha);

}  // namespace fnd
