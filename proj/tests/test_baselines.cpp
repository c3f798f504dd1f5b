#include <doctest.h>

#include <cmath>

#include "fnd/baselines.hpp"
#include "fnd/dataset.hpp"
#include "fnd/errors.hpp"
#include "fnd/metrics.hpp"
#include "fnd/rng.hpp"
#include "baseline_reference.hpp"

using namespace fnd;

TEST_CASE("metrics examples") {
  const auto perfect = compute_metrics({.tp = 10});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const auto m = compute_metrics({.tp = 8, .fp = 2, .tn = 6, .fn = 4});
  CHECK(m.accuracy == doctest::Approx(14.0 / 20.0));
  CHECK(m.precision == doctest::Approx(0.8));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2.0 * 0.8 * (2.0 / 3.0) / (0.8 + 2.0 / 3.0)));

  const auto none = compute_metrics({.tp = 0, .fp = 0, .tn = 5, .fn = 5});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.accuracy == 0.5);

  CHECK_THROWS_AS(compute_metrics({}), ContractError);
}

TEST_CASE("metrics properties over random confusion matrices") {
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    ConfusionMatrix cm{rng.below(30), rng.below(30), rng.below(30), rng.below(30)};
    if (cm.total() == 0) cm.tn = 1;
    const auto m = compute_metrics(cm);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(m.accuracy == static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()));
    if (m.precision + m.recall > 0.0) {
      CHECK(m.f1 == doctest::Approx(2.0 / (1.0 / std::max(m.precision, 1e-300) + 1.0 / std::max(m.recall, 1e-300)))
                        .epsilon(1e-12));
    }
  }
}

TEST_CASE("confusion counts match the evaluated records") {
  const std::vector<int> predicted = {1, 1, 0, 0, 1};
  const std::vector<int> actual = {1, 0, 0, 1, 1};
  const auto cm = confusion(predicted, actual);
  CHECK(cm == ConfusionMatrix{.tp = 2, .fp = 1, .tn = 1, .fn = 1});
  CHECK(cm.total() == predicted.size());

  const std::vector<double> proba = {0.5, 0.49, 0.9, 0.1};
  const std::vector<int> labels = {1, 1, 0, 0};
  CHECK(confusion_from_proba(proba, labels) == ConfusionMatrix{.tp = 1, .fp = 1, .tn = 1, .fn = 1});
  CHECK_THROWS_AS(confusion(predicted, labels), DimensionError);
  CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{1}), ContractError);
}

TEST_CASE("logistic regression separates two points") {
  FeatureMatrix x;
  x.append(std::vector<double>{-1.0});
  x.append(std::vector<double>{1.0});
  const std::vector<int> y = {0, 1};
  const auto model = train_logreg(x, y, {.l2 = 0.0, .epochs = 500, .learning_rate = 0.5});
  CHECK(model.predict(x.row(0)) == 0);
  CHECK(model.predict(x.row(1)) == 1);
  CHECK(model.weights[0] > 0.0);

  const auto untrained = train_logreg(x, y, {.epochs = 0});
  CHECK(untrained.weights == std::vector<double>{0.0});
  Rng rng(2);
  for (int i = 0; i < 20; ++i) CHECK(untrained.predict_proba(std::vector<double>{rng.uniform(-9.0, 9.0)}) == 0.5);

  CHECK_THROWS_AS(train_logreg(x, std::vector<int>{1, 1}, {}), ContractError);
  CHECK_THROWS_AS(train_logreg(x, y, {.learning_rate = 0.0}), ConfigError);
  CHECK_THROWS_AS(model.predict_proba(std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST_CASE("naive Bayes hand example") {
  // Vocabulary {fake, real}. Class 1 saw "fake fake", class 0 saw "real".
  const std::array<std::vector<double>, 2> counts = {std::vector<double>{0.0, 1.0}, std::vector<double>{2.0, 0.0}};
  const auto model = train_nb(counts, {1.0, 1.0}, 1.0);
  // P(fake | 1) = (2+1)/(2+2) = 3/4, P(fake | 0) = (0+1)/(1+2) = 1/3, equal priors.
  CHECK(model.log_likelihood[1][0] == doctest::Approx(std::log(0.75)));
  CHECK(model.log_likelihood[0][0] == doctest::Approx(std::log(1.0 / 3.0)));
  const auto jll = model.joint_log_likelihood(std::vector<double>{1.0, 0.0});
  CHECK(jll[1] == doctest::Approx(std::log(0.5) + std::log(0.75)));
  CHECK(jll[0] == doctest::Approx(std::log(0.5) + std::log(1.0 / 3.0)));
  CHECK(model.predict(std::vector<double>{1.0, 0.0}) == 1);
  CHECK(model.predict(std::vector<double>{0.0, 1.0}) == 0);
}

TEST_CASE("naive Bayes ties go to class 0 and bad inputs are refused") {
  const std::array<std::vector<double>, 2> uniform = {std::vector<double>{3.0, 3.0, 3.0},
                                                      std::vector<double>{3.0, 3.0, 3.0}};
  const auto model = train_nb(uniform, {5.0, 5.0}, 1.0);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> doc = {static_cast<double>(rng.below(4)), static_cast<double>(rng.below(4)),
                               static_cast<double>(rng.below(4))};
    CHECK(model.predict(doc) == 0);
  }
  CHECK_THROWS_AS(train_nb(uniform, {1.0, 1.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(train_nb({std::vector<double>{}, std::vector<double>{}}, {1.0, 1.0}, 1.0), ContractError);
}

TEST_CASE("naive Bayes decisions are unchanged when counts and smoothing scale together") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vocab = 2 + rng.below(10);
    std::array<std::vector<double>, 2> counts;
    for (auto& c : counts) {
      c.resize(vocab);
      for (auto& v : c) v = static_cast<double>(rng.below(20));
    }
    const std::array<double, 2> docs = {1.0 + static_cast<double>(rng.below(10)),
                                        1.0 + static_cast<double>(rng.below(10))};
    const double factor = static_cast<double>(2 + rng.below(5));
    auto scaled = counts;
    for (auto& c : scaled)
      for (auto& v : c) v *= factor;
    const auto base = train_nb(counts, docs, 0.5);
    const auto big = train_nb(scaled, {docs[0] * factor, docs[1] * factor}, 0.5 * factor);
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<double> doc(vocab);
      for (auto& v : doc) v = static_cast<double>(rng.below(3));
      const auto a = base.joint_log_likelihood(doc);
      const auto b = big.joint_log_likelihood(doc);
      CHECK(a[1] - a[0] == doctest::Approx(b[1] - b[0]).epsilon(1e-9));
      CHECK(base.predict(doc) == big.predict(doc));
    }
  }
}

using testing::newton_logreg;
using testing::synthetic;

namespace {

double accuracy_of(const std::vector<int>& predicted, const std::vector<int>& actual) {
  return compute_metrics(confusion(predicted, actual)).accuracy;
}

}  // namespace

TEST_CASE("logistic regression agrees with a Newton reference on the synthetic corpus") {
  const auto& data = synthetic();
  REQUIRE(data.train_x.rows > 0);
  REQUIRE(data.test_x.rows > 0);
  const auto model = train_logreg(data.train_x, data.train_y, {});
  const Eigen::VectorXd beta = newton_logreg(data.train_x, data.train_y, 1e-3);

  std::vector<int> ours, reference;
  for (std::size_t i = 0; i < data.test_x.rows; ++i) {
    const auto row = data.test_x.row(i);
    ours.push_back(model.predict(row));
    double z = beta[0];
    for (std::size_t j = 0; j < row.size(); ++j) z += beta[static_cast<Eigen::Index>(j) + 1] * row[j];
    reference.push_back(z >= 0.0 ? 1 : 0);
  }
  const double acc = accuracy_of(ours, data.test_y);
  const double ref_acc = accuracy_of(reference, data.test_y);
  MESSAGE("logreg accuracy " << acc << ", Newton reference " << ref_acc);
  CHECK(std::abs(acc - ref_acc) <= 0.05);
}

TEST_CASE("logistic regression loss does not increase at a small step size") {
  const auto& data = synthetic();
  const auto model = train_logreg(data.train_x, data.train_y, {.epochs = 200, .learning_rate = 0.01});
  REQUIRE(model.loss_history.size() == 201);
  for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
    CHECK(model.loss_history[i] <= model.loss_history[i - 1] + 1e-12);
  }
  CHECK(model.loss_history.back() < model.loss_history.front());

  const auto again = train_logreg(data.train_x, data.train_y, {.epochs = 200, .learning_rate = 0.01});
  CHECK(again.weights == model.weights);
}

TEST_CASE("naive Bayes on the synthetic corpus under duplication and scaling") {
  const auto& data = synthetic();
  const auto model = train_nb(data.train_counts, data.train_y, 1.0);

  FeatureMatrix doubled = data.train_counts;
  std::vector<int> doubled_y = data.train_y;
  for (std::size_t r = 0; r < data.train_counts.rows; ++r) {
    doubled.append(data.train_counts.row(r));
    doubled_y.push_back(data.train_y[r]);
  }
  const auto dup = train_nb(doubled, doubled_y, 1.0);
  const auto dup_scaled_alpha = train_nb(doubled, doubled_y, 2.0);

  std::size_t same_fixed_alpha = 0;
  for (std::size_t i = 0; i < data.test_counts.rows; ++i) {
    const auto row = data.test_counts.row(i);
    CHECK(dup_scaled_alpha.predict(row) == model.predict(row));
    same_fixed_alpha += dup.predict(row) == model.predict(row);
  }
  // With the smoothing constant held fixed the invariance is approximate; on
  // this corpus it holds for every test document.
  CHECK(same_fixed_alpha == data.test_counts.rows);

  std::vector<int> predicted;
  for (std::size_t i = 0; i < data.test_counts.rows; ++i) predicted.push_back(model.predict(data.test_counts.row(i)));
  MESSAGE("naive Bayes accuracy " << accuracy_of(predicted, data.test_y));
}
