#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace subcam {

using Shape = std::vector<int>;

std::int64_t shape_size(std::span<const int> shape);

class ComputationTape;

namespace detail {
struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on demand, same length as value
  bool requires_grad = false;
  const ComputationTape* tape = nullptr;  // tape that recorded the producing op
};
}  // namespace detail

// Dense row-major double tensor with reference semantics: copies share the
// underlying node, so gradients written by backward() are visible through
// every handle.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar_value(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::int64_t size() const;
  int dim(int i) const { return shape()[static_cast<std::size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape().size()); }

  std::span<const double> values() const;
  std::span<double> values();

  bool requires_grad() const;
  void set_requires_grad(bool rg);

  bool has_grad() const;
  std::span<const double> grad() const;  // throws when no grad was computed
  void zero_grad();

  double scalar() const;  // requires size() == 1

  bool all_finite() const;

 private:
  friend class ComputationTape;
  friend Tensor make_op_output(Shape shape, std::vector<double> value,
                               std::initializer_list<Tensor> inputs);
  friend detail::TensorNode* node_of(const Tensor& t);

  std::shared_ptr<detail::TensorNode> node_;
};

// Reverse-mode tape. Constructing one makes it the active tape for the
// current thread (scopes nest); primitives record themselves when any input
// requires gradients. backward() propagates from a scalar loss through the
// recorded operations in reverse order and then clears the tape.
class ComputationTape {
 public:
  ComputationTape();
  ~ComputationTape();
  ComputationTape(const ComputationTape&) = delete;
  ComputationTape& operator=(const ComputationTape&) = delete;

  static ComputationTape* active();

  void record(std::function<void()> backward_fn);
  std::size_t num_recorded() const { return entries_.size(); }

  void backward(const Tensor& loss);

 private:
  std::vector<std::function<void()>> entries_;
  ComputationTape* previous_ = nullptr;
};

// Primitive-author helpers (used by ops.cpp, exposed for custom primitives):
// make_op_output wires requires_grad/tape propagation from inputs to the
// freshly created output node.
Tensor make_op_output(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs);
detail::TensorNode* node_of(const Tensor& t);

}  // namespace subcam
