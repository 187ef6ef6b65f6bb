#include "subcam/tensor.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "subcam/util.hpp"

namespace subcam {

std::int64_t shape_size(std::span<const int> shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor shape has non-positive dimension " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::int64_t n = shape_size(shape);
  return from_values(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0), requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != static_cast<std::int64_t>(values.size())) {
    throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                " values do not fill shape " + shape_to_string(shape));
  }
  Tensor t;
  t.node_ = std::make_shared<detail::TensorNode>();
  t.node_->shape = std::move(shape);
  t.node_->value = std::move(values);
  t.node_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar_value(double v, bool requires_grad) {
  return from_values({1}, {v}, requires_grad);
}

const Shape& Tensor::shape() const {
  if (!node_) throw std::logic_error("tensor: use of undefined tensor");
  return node_->shape;
}

std::int64_t Tensor::size() const { return static_cast<std::int64_t>(node_->value.size()); }

std::span<const double> Tensor::values() const {
  if (!node_) throw std::logic_error("tensor: use of undefined tensor");
  return node_->value;
}

std::span<double> Tensor::values() {
  if (!node_) throw std::logic_error("tensor: use of undefined tensor");
  return node_->value;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool rg) {
  if (!node_) throw std::logic_error("tensor: use of undefined tensor");
  node_->requires_grad = rg;
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw std::logic_error("tensor: gradient not populated");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_) return;
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::scalar() const {
  if (!node_ || node_->value.size() != 1) {
    throw std::invalid_argument("tensor: scalar() requires a single-element tensor");
  }
  return node_->value[0];
}

bool Tensor::all_finite() const {
  for (double v : node_->value) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

detail::TensorNode* node_of(const Tensor& t) { return t.node_.get(); }

namespace {
thread_local ComputationTape* g_active_tape = nullptr;

void ensure_grad(detail::TensorNode* n) {
  if (n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
}
}  // namespace

ComputationTape::ComputationTape() {
  previous_ = g_active_tape;
  g_active_tape = this;
}

ComputationTape::~ComputationTape() { g_active_tape = previous_; }

ComputationTape* ComputationTape::active() { return g_active_tape; }

void ComputationTape::record(std::function<void()> backward_fn) {
  entries_.push_back(std::move(backward_fn));
}

void ComputationTape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  if (loss.node_->tape != this) {
    throw std::invalid_argument("backward: loss was not produced on this tape");
  }
  ensure_grad(loss.node_.get());
  loss.node_->grad[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
  entries_.clear();
}

// Creates the output node of a primitive and registers grad bookkeeping:
// the output requires grad (and carries the tape tag) when a tape is active
// and any input requires grad.
Tensor make_op_output(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs) {
  Tensor out = Tensor::from_values(std::move(shape), std::move(value), false);
  ComputationTape* tape = ComputationTape::active();
  if (!tape) return out;
  bool any = false;
  for (const Tensor& in : inputs) {
    if (in.defined() && in.requires_grad()) any = true;
  }
  if (any) {
    out.node_->requires_grad = true;
    out.node_->tape = tape;
    ensure_grad(out.node_.get());
    for (const Tensor& in : inputs) {
      if (in.defined() && in.requires_grad()) ensure_grad(node_of(in));
    }
  }
  return out;
}

}  // namespace subcam
