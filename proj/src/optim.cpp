#include "fnd/optim.hpp"

#include <cmath>
#include <string>

#include "fnd/errors.hpp"

namespace fnd {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config_.learning_rate > 0.0)) {
    throw ConfigError("adam: learning rate must be positive, got " + std::to_string(config_.learning_rate));
  }
  if (config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(config_.epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
}

void Adam::step(std::span<Parameter> params) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;

  for (auto& p : params) {
    if (!p.value.has_grad()) continue;
    auto& m = moments_[p.value.identity()];
    const std::size_t n = p.value.size();
    if (m.first.size() != n) {
      m.first.assign(n, 0.0);
      m.second.assign(n, 0.0);
    }
    auto w = p.value.mutable_data();
    auto g = p.value.grad();
    for (std::size_t i = 0; i < n; ++i) {
      m.first[i] = b1 * m.first[i] + (1.0 - b1) * g[i];
      m.second[i] = b2 * m.second[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m.first[i] / correction1;
      const double v_hat = m.second[i] / correction2;
      w[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      g[i] = 0.0;
    }
  }
}

void zero_grads(std::span<Parameter> params) {
  for (auto& p : params) p.value.zero_grad();
}

}  // namespace fnd
