#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fnd/errors.hpp"
#include "fnd/optim.hpp"
#include "fnd/rng.hpp"
#include "fnd/tensor.hpp"
#include "gradcheck.hpp"

using namespace fnd;
using fnd::testing::check_gradients;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (auto& v : t.mutable_data()) v = rng.uniform(lo, hi);
  return t;
}

Parameter param(const std::string& name, Tensor t) {
  t.set_requires_grad(true);
  return {name, t};
}

bool all_finite(const Tensor& t) {
  for (double v : t.data())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

TEST_CASE("tensor construction checks shape against data") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{0, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{}), DimensionError);
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_FALSE(t.has_grad());
  t.grad();
  CHECK(t.grad().size() == t.size());
}

TEST_CASE("matmul") {
  const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const Tensor m = Tensor::matrix(2, 2, {1, 2, 3, 4});
  const Tensor same = matmul(eye, m);
  CHECK(std::vector<double>(same.data().begin(), same.data().end()) == std::vector<double>{1, 2, 3, 4});

  const Tensor col = matmul(m, Tensor::matrix(2, 1, {0, 1}));
  CHECK(col.shape() == Shape{2, 1});
  CHECK(col.at(0, 0) == 2.0);
  CHECK(col.at(1, 0) == 4.0);

  const Tensor a({2, 3});
  try {
    matmul(a, Tensor({2, 3}));
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("and [2x3]") != std::string::npos);
  }
}

TEST_CASE("elementwise operations") {
  Tensor x = Tensor::vector({0.0});
  x.set_requires_grad(true);
  {
    Tape tape;
    const Tensor y = fnd::tanh(x);
    CHECK(y.item() == 0.0);
    tape.backward(sum(y));
  }
  CHECK(x.grad()[0] == doctest::Approx(1.0));

  CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
  CHECK(relu(Tensor::scalar(-3.2)).item() == 0.0);
  CHECK(relu(Tensor::scalar(3.2)).item() == 3.2);
  CHECK_THROWS_AS(add(Tensor({2}), Tensor({3})), DimensionError);
  CHECK_THROWS_AS(mul(Tensor({2, 1}), Tensor({2})), DimensionError);
  CHECK_THROWS_AS(add(Tensor(), Tensor({1})), DimensionError);
}

TEST_CASE("softmax") {
  for (double c : {-5.0, 0.0, 2.5, 1e6}) {
    const Tensor s = softmax(Tensor::vector({c, c, c}));
    for (double v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  const Tensor big = softmax(Tensor::vector({1000.0, 0.0}));
  CHECK(all_finite(big));
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] < 1e-300);

  const Tensor s = softmax(Tensor::vector({1, 2, 3}));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(s[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(std::exp(2.0) / z).epsilon(1e-14));
  CHECK(s[2] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));

  CHECK_THROWS_AS(softmax(Tensor()), DimensionError);
  CHECK_THROWS_AS(softmax(Tensor({2, 2})), DimensionError);
}

TEST_CASE("softmax sums to one and ignores a constant shift") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    Tensor x = random_tensor({n}, rng, -30.0, 30.0);
    const double shift = rng.uniform(-100.0, 100.0);
    Tensor shifted({n});
    for (std::size_t i = 0; i < n; ++i) shifted.mutable_data()[i] = x[i] + shift;
    const Tensor a = softmax(x), b = softmax(shifted);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += a[i];
      CHECK(a[i] > 0.0);
      CHECK(std::abs(a[i] - b[i]) <= 1e-9);
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("binary cross-entropy") {
  const double eps = kBceEpsilon;
  CHECK(bce_loss(Tensor::vector({1.0 - eps}), Tensor::vector({1.0})).item() == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bce_loss(Tensor::vector({0.5}), Tensor::vector({1.0})).item() == doctest::Approx(std::log(2.0)));
  const double expected = (-std::log(0.9) - std::log(0.8)) / 2.0;
  CHECK(bce_loss(Tensor::vector({0.9, 0.2}), Tensor::vector({1.0, 0.0})).item() == doctest::Approx(expected));

  CHECK(std::isfinite(bce_loss(Tensor::vector({0.0, 1.0}), Tensor::vector({1.0, 0.0})).item()));
  CHECK_THROWS_AS(bce_loss(Tensor::vector({0.5, 0.5}), Tensor::vector({1.0})), DimensionError);
  CHECK_THROWS_AS(bce_loss(Tensor::vector({0.5}), Tensor::vector({0.3})), ContractError);
}

TEST_CASE("backward") {
  SUBCASE("derivative of a sum is all ones") {
    Tensor w = Tensor::matrix(2, 3, {1, -2, 3, 0.5, 0, 9});
    w.set_requires_grad(true);
    Tape tape;
    tape.backward(sum(w));
    for (double g : w.grad()) CHECK(g == 1.0);
  }
  SUBCASE("sigmoid at zero has slope one quarter") {
    Tensor w = Tensor::vector({0.0, 0.0, 0.0});
    w.set_requires_grad(true);
    const Tensor x = Tensor::vector({1.5, -2.0, 4.0});
    Tape tape;
    tape.backward(sigmoid(dot(w, x)));
    for (std::size_t i = 0; i < 3; ++i) CHECK(w.grad()[i] == doctest::Approx(0.25 * x[i]));
  }
  SUBCASE("non-scalar loss is rejected") {
    Tensor w = Tensor::vector({1.0, 2.0});
    w.set_requires_grad(true);
    Tape tape;
    CHECK_THROWS_AS(tape.backward(fnd::tanh(w)), ContractError);
  }
  SUBCASE("a loss that was not recorded is rejected") {
    Tape tape;
    CHECK_THROWS_AS(tape.backward(Tensor::scalar(1.0)), ContractError);
    CHECK_THROWS_AS(fnd::backward(Tensor::scalar(1.0)), ContractError);
  }
  SUBCASE("repeated passes accumulate until zeroed") {
    Tensor w = Tensor::vector({0.3, -0.7});
    w.set_requires_grad(true);
    for (int i = 0; i < 2; ++i) {
      Tape tape;
      tape.backward(sum(mul(w, w)));
    }
    CHECK(w.grad()[0] == doctest::Approx(4 * 0.3));
    CHECK(w.grad()[1] == doctest::Approx(4 * -0.7));
    w.zero_grad();
    CHECK(w.grad()[0] == 0.0);
  }
  SUBCASE("no tape means no recording") {
    Tensor w = Tensor::vector({1.0});
    w.set_requires_grad(true);
    const Tensor y = fnd::tanh(w);
    CHECK_FALSE(y.requires_grad());
  }
}

TEST_CASE("analytic gradients match finite differences for every operation") {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(3), k = 1 + rng.below(4), n = 1 + rng.below(3);
    std::vector<Parameter> ps = {
        param("a", random_tensor({m, k}, rng)),    param("b", random_tensor({k, n}, rng)),
        param("v", random_tensor({k}, rng)),       param("u", random_tensor({k}, rng)),
        param("bias", random_tensor({k}, rng)),    param("table", random_tensor({4, k}, rng)),
    };
    const Tensor probe_mn = random_tensor({m, n}, rng);
    const Tensor probe_k = random_tensor({k}, rng);
    const Tensor probe_kn = random_tensor({k, n}, rng);
    const Tensor labels = Tensor::vector({1.0, 0.0});
    const std::size_t index = rng.below(4);
    const std::size_t off = rng.below(k);
    const std::size_t len = 1 + rng.below(k - off);

    // Each op is folded into a scalar through a fixed random projection.
    const std::vector<std::function<Tensor()>> losses = {
        [&] { return sum(mul(matmul(ps[0].value, ps[1].value), probe_mn)); },
        [&] { return dot(matmul(ps[0].value, ps[2].value), Tensor(Shape{m}, std::vector<double>(m, 0.7))); },
        [&] { return sum(mul(transpose(ps[1].value), transpose(probe_kn))); },
        [&] { return dot(add(ps[2].value, ps[3].value), probe_k); },
        [&] { return dot(mul(ps[2].value, ps[3].value), probe_k); },
        [&] { return dot(fnd::tanh(ps[2].value), probe_k); },
        [&] { return dot(sigmoid(mul(ps[2].value, Tensor(Shape{k}, std::vector<double>(k, 3.0)))), probe_k); },
        [&] { return dot(relu(add(ps[2].value, Tensor(Shape{k}, std::vector<double>(k, 2.0)))), probe_k); },
        [&] { return dot(softmax(ps[2].value), probe_k); },
        [&] {
          const std::vector<Tensor> two = {sigmoid(dot(ps[2].value, probe_k)), sigmoid(dot(ps[3].value, probe_k))};
          return bce_loss(concat(two), labels);
        },
        [&] { return dot(slice(ps[2].value, off, len), slice(probe_k, off, len)); },
        [&] {
          const std::vector<Tensor> rows = {ps[2].value, ps[3].value};
          return sum(mul(stack(rows), stack(std::vector<Tensor>{probe_k, probe_k})));
        },
        [&] { return dot(row(ps[5].value, index), probe_k); },
        [&] {
          const std::vector<std::size_t> pick = {index, (index + 1) % 4, index};
          return sum(mul(select_rows(ps[5].value, pick), stack(std::vector<Tensor>{probe_k, ps[2].value, probe_k})));
        },
        [&] {
          const Tensor shifted = add_rowwise(ps[5].value, ps[4].value);
          return sum(mul(fnd::tanh(shifted), ps[5].value));
        },
    };
    for (const auto& loss : losses) {
      const auto result = check_gradients(loss, ps);
      worst = std::max(worst, result.max_rel_error);
      if (result.max_rel_error > 1e-3) {
        FAIL_CHECK("gradient mismatch at " << result.worst << ": " << result.max_rel_error);
      }
    }
  }
  MESSAGE("largest relative error over all ops: " << worst);
}

TEST_CASE("forward and backward stay finite on extreme inputs") {
  Tensor x = Tensor::vector({-1e6, -700.0, 0.0, 700.0, 1e6});
  x.set_requires_grad(true);
  Tape tape;
  const Tensor s = sigmoid(x);
  const Tensor t = fnd::tanh(x);
  const Tensor sm = softmax(x);
  const Tensor loss = add(add(bce_loss(s, Tensor::vector({1, 0, 1, 0, 1})), sum(t)), dot(sm, x));
  CHECK(all_finite(s));
  CHECK(all_finite(t));
  CHECK(all_finite(sm));
  tape.backward(loss);
  CHECK(all_finite(Tensor(x.shape(), std::vector<double>(x.grad().begin(), x.grad().end()))));
}

TEST_CASE("replaying the same graph after zeroing yields identical gradients") {
  Rng rng(3);
  Tensor w = random_tensor({3, 3}, rng);
  Tensor v = random_tensor({3}, rng);
  w.set_requires_grad(true);
  auto run = [&] {
    w.zero_grad();
    Tape tape;
    tape.backward(sum(fnd::tanh(matmul(w, v))));
    return std::vector<double>(w.grad().begin(), w.grad().end());
  };
  CHECK(run() == run());
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Parameter p{"w", Tensor::vector({1.0, -2.0})};
    p.value.set_requires_grad(true);
    p.value.grad();
    Adam adam;
    std::vector<Parameter> ps = {p};
    adam.step(ps);
    CHECK(p.value[0] == 1.0);
    CHECK(p.value[1] == -2.0);
  }
  SUBCASE("constant gradient moves against its sign") {
    Parameter p{"w", Tensor::scalar(0.0)};
    p.value.set_requires_grad(true);
    std::vector<Parameter> ps = {p};
    Adam adam;
    for (int i = 0; i < 50; ++i) {
      p.value.grad()[0] = 2.5;
      adam.step(ps);
      CHECK(p.value.grad()[0] == 0.0);
    }
    CHECK(p.value.item() < 0.0);
  }
  SUBCASE("ten steps on (w-3)^2 approach the minimum like a scalar reference") {
    Parameter p{"w", Tensor::scalar(0.0)};
    p.value.set_requires_grad(true);
    std::vector<Parameter> ps = {p};
    Adam adam({.learning_rate = 0.1});
    double w = 0.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 10; ++t) {
      {
        Tape tape;
        const Tensor d = add(p.value, Tensor::scalar(-3.0));
        tape.backward(mul(d, d));
      }
      adam.step(ps);
      const double g = 2.0 * (w - 3.0);
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      w -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    }
    CHECK(p.value.item() == doctest::Approx(w).epsilon(1e-12));
    CHECK(std::abs(p.value.item() - 3.0) < 3.0);
    CHECK(adam.steps() == 10);
  }
  SUBCASE("invalid settings") {
    CHECK_THROWS_AS(Adam({.learning_rate = 0.0}), ConfigError);
    CHECK_THROWS_AS(Adam({.learning_rate = -1.0}), ConfigError);
    CHECK_THROWS_AS(Adam({.learning_rate = 0.1, .beta1 = 1.0}), ConfigError);
    CHECK_THROWS_AS(Adam({.learning_rate = 0.1, .epsilon = 0.0}), ConfigError);
  }
}
