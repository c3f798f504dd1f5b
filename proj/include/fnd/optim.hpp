#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "fnd/tensor.hpp"

namespace fnd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers are keyed by parameter storage and
// persist across steps; each step zeroes the gradients it consumed.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void step(std::span<Parameter> params);

  const AdamConfig& config() const noexcept { return config_; }
  long steps() const noexcept { return steps_; }

 private:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };

  AdamConfig config_;
  long steps_ = 0;
  std::unordered_map<const void*, Moments> moments_;
};

void zero_grads(std::span<Parameter> params);

}  // namespace fnd
