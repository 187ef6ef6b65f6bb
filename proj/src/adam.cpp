#include "subcam/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace subcam {

void AdamConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("adam: learning_rate must be positive");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) {
    throw std::invalid_argument("adam: betas must lie in (0,1)");
  }
  if (epsilon <= 0.0) throw std::invalid_argument("adam: epsilon must be positive");
  if (weight_decay < 0.0) throw std::invalid_argument("adam: weight_decay must be non-negative");
}

AdamOptimizer::AdamOptimizer(AdamConfig config) : config_(config) { config_.validate(); }

void AdamOptimizer::set_learning_rate(double lr) {
  if (lr <= 0.0) throw std::invalid_argument("adam: learning_rate must be positive");
  config_.learning_rate = lr;
}

void AdamOptimizer::step(std::span<double* const> params, std::span<const std::size_t> sizes,
                         std::span<const double* const> grads) {
  if (params.size() != grads.size() || params.size() != sizes.size()) {
    throw std::invalid_argument("adam: params, sizes and grads must have equal counts");
  }
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(sizes[i], 0.0);
      v_[i].assign(sizes[i], 0.0);
    }
  } else if (m_.size() != params.size()) {
    throw std::invalid_argument("adam: parameter count changed between steps");
  }

  step_count_ += 1;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  const double lr = config_.learning_rate;

  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i] == nullptr) {
      throw std::invalid_argument("adam: missing gradient for parameter " + std::to_string(i));
    }
    if (m_[i].size() != sizes[i]) {
      throw std::invalid_argument("adam: parameter " + std::to_string(i) + " changed size");
    }
    double* p = params[i];
    const double* g = grads[i];
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t j = 0; j < sizes[i]; ++j) {
      double grad = g[j];
      if (config_.weight_decay != 0.0 && !config_.decoupled_weight_decay) {
        grad += config_.weight_decay * p[j];
      }
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * grad;
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * grad * grad;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      double update = lr * mhat / (std::sqrt(vhat) + config_.epsilon);
      if (config_.weight_decay != 0.0 && config_.decoupled_weight_decay) {
        update += lr * config_.weight_decay * p[j];
      }
      p[j] -= update;
    }
  }
}

void AdamOptimizer::step(const std::vector<std::vector<double>*>& params,
                         const std::vector<const std::vector<double>*>& grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam: params and grads must have equal counts");
  }
  std::vector<double*> p(params.size());
  std::vector<std::size_t> s(params.size());
  std::vector<const double*> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] == nullptr) throw std::invalid_argument("adam: null parameter");
    if (grads[i] == nullptr || grads[i]->size() != params[i]->size()) {
      throw std::invalid_argument("adam: missing gradient for parameter " + std::to_string(i));
    }
    p[i] = params[i]->data();
    s[i] = params[i]->size();
    g[i] = grads[i]->data();
  }
  step(p, s, g);
}

}  // namespace subcam
