#include "fnd/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "fnd/errors.hpp"

namespace fnd {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_labels(std::size_t rows, std::span<const int> labels) {
  if (labels.size() != rows) {
    throw DimensionError(std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " rows");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw ContractError("labels must be 0 or 1");
  }
}

}  // namespace

void FeatureMatrix::append(std::span<const double> row) {
  if (rows == 0 && values.empty()) cols = row.size();
  if (row.size() != cols) {
    throw DimensionError("row of width " + std::to_string(row.size()) + " appended to matrix of width " +
                         std::to_string(cols));
  }
  values.insert(values.end(), row.begin(), row.end());
  ++rows;
}

std::vector<double> bag_of_words(const NewsRecord& record, const Vocabulary& vocab) {
  std::vector<double> counts(vocab.size(), 0.0);
  for (const auto* text : {&record.news_text, &record.tweet_text}) {
    for (const auto& token : tokenize(*text)) counts[static_cast<std::size_t>(vocab.id(token))] += 1.0;
  }
  return counts;
}

std::vector<double> baseline_row(const NewsRecord& record, const Vocabulary& vocab, const FeatureVector& assembled) {
  auto row = bag_of_words(record, vocab);
  row.insert(row.end(), assembled.aux.begin(), assembled.aux.end());
  return row;
}

// ---- logistic regression --------------------------------------------------

double LogisticModel::predict_proba(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw DimensionError("logistic model expects " + std::to_string(weights.size()) + " features, got " +
                         std::to_string(x.size()));
  }
  double z = bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * x[j];
  return sigmoid(z);
}

LogisticModel train_logreg(const FeatureMatrix& x, std::span<const int> labels, const LogRegOptions& options) {
  check_labels(x.rows, labels);
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(labels.size())) {
    throw ContractError("train_logreg: training set must contain both classes");
  }
  if (!(options.learning_rate > 0.0)) throw ConfigError("train_logreg: learning rate must be positive");
  if (options.l2 < 0.0) throw ConfigError("train_logreg: l2 must not be negative");

  const auto n = static_cast<Eigen::Index>(x.rows);
  const auto d = static_cast<Eigen::Index>(x.cols);
  const Eigen::Map<const RowMatrix> design(x.values.data(), n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [&](const Eigen::VectorXd& z) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss -= y[i] * log_sigmoid(z[i]) + (1.0 - y[i]) * log_sigmoid(-z[i]);
    return loss * inv_n + 0.5 * options.l2 * w.squaredNorm();
  };

  LogisticModel model;
  model.loss_history.reserve(options.epochs + 1);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const Eigen::VectorXd z = (design * w).array() + b;
    model.loss_history.push_back(objective(z));
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) residual[i] = sigmoid(z[i]) - y[i];
    const Eigen::VectorXd grad_w = design.transpose() * residual * inv_n + options.l2 * w;
    const double grad_b = residual.sum() * inv_n;
    w -= options.learning_rate * grad_w;
    b -= options.learning_rate * grad_b;
  }
  model.loss_history.push_back(objective((design * w).array() + b));
  model.weights.assign(w.data(), w.data() + d);
  model.bias = b;
  return model;
}

// ---- naive Bayes ----------------------------------------------------------

std::array<double, 2> NaiveBayesModel::joint_log_likelihood(std::span<const double> counts) const {
  if (counts.size() != log_likelihood[0].size()) {
    throw DimensionError("naive Bayes expects " + std::to_string(log_likelihood[0].size()) + " counts, got " +
                         std::to_string(counts.size()));
  }
  std::array<double, 2> score = log_prior;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (counts[w] == 0.0) continue;
    score[0] += counts[w] * log_likelihood[0][w];
    score[1] += counts[w] * log_likelihood[1][w];
  }
  return score;
}

int NaiveBayesModel::predict(std::span<const double> counts) const {
  const auto score = joint_log_likelihood(counts);
  return score[1] > score[0] ? 1 : 0;
}

NaiveBayesModel train_nb(const std::array<std::vector<double>, 2>& token_counts,
                         const std::array<double, 2>& documents, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("train_nb: alpha must be positive, got " + std::to_string(alpha));
  const std::size_t vocab = token_counts[0].size();
  if (vocab == 0) throw ContractError("train_nb: empty vocabulary");
  if (token_counts[1].size() != vocab) throw DimensionError("train_nb: class count vectors differ in length");
  if (documents[0] < 0.0 || documents[1] < 0.0 || documents[0] + documents[1] <= 0.0) {
    throw ContractError("train_nb: no training documents");
  }

  NaiveBayesModel model;
  model.alpha = alpha;
  const double total_docs = documents[0] + documents[1];
  for (std::size_t c = 0; c < 2; ++c) {
    model.log_prior[c] = std::log(documents[c] / total_docs);
    double mass = 0.0;
    for (double v : token_counts[c]) mass += v;
    const double denom = std::log(mass + alpha * static_cast<double>(vocab));
    model.log_likelihood[c].resize(vocab);
    for (std::size_t w = 0; w < vocab; ++w) model.log_likelihood[c][w] = std::log(token_counts[c][w] + alpha) - denom;
  }
  return model;
}

NaiveBayesModel train_nb(const FeatureMatrix& counts, std::span<const int> labels, double alpha) {
  check_labels(counts.rows, labels);
  std::array<std::vector<double>, 2> totals{std::vector<double>(counts.cols, 0.0),
                                            std::vector<double>(counts.cols, 0.0)};
  std::array<double, 2> documents{0.0, 0.0};
  for (std::size_t r = 0; r < counts.rows; ++r) {
    const auto c = static_cast<std::size_t>(labels[r]);
    documents[c] += 1.0;
    const auto row = counts.row(r);
    for (std::size_t w = 0; w < counts.cols; ++w) {
      if (row[w] < 0.0) throw ContractError("train_nb: negative count in column " + std::to_string(w));
      totals[c][w] += row[w];
    }
  }
  return train_nb(totals, documents, alpha);
}

}  // namespace fnd
