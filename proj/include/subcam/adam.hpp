#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace subcam {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  // Default folds the decay into the gradient before the moment update
  // (classic Adam with an L2 term). The decoupled variant subtracts
  // lr * wd * param directly instead.
  bool decoupled_weight_decay = false;

  void validate() const;
};

// Adam with bias correction. Parameters must be passed in the same order on
// every step; moment buffers are allocated on the first step.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig config);

  void step(std::span<double* const> params, std::span<const std::size_t> sizes,
            std::span<const double* const> grads);

  // Convenience for vector-of-vectors storage.
  void step(const std::vector<std::vector<double>*>& params,
            const std::vector<const std::vector<double>*>& grads);

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr);

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t step_count_ = 0;
};

}  // namespace subcam
