#pragma once

#include <span>

#include "subcam/tensor.hpp"

// Differentiable primitives. Spatial tensors are [H, W, C] row-major
// (channels last); convolution weights are [Cout, Kh, Kw, Cin]. Every
// primitive validates shapes up front and throws std::invalid_argument
// naming the operation and the offending shapes. All loops run in a fixed
// order, so results are bit-reproducible.
namespace subcam::ops {

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor scale(const Tensor& x, double factor);

// x: [H, W, Cin], weight: [Cout, Kh, Kw, Cin], zero padding, stride >= 1.
Tensor conv2d(const Tensor& x, const Tensor& weight, int padding, int stride = 1);

// x: [H, W, C] (or [C]), bias: [C], broadcast over the leading dimensions.
Tensor bias_add(const Tensor& x, const Tensor& bias);

Tensor max_pool2(const Tensor& x);        // [H, W, C] -> [H/2, W/2, C]
Tensor global_avg_pool(const Tensor& x);  // [H, W, C] -> [C]

Tensor matmul(const Tensor& a, const Tensor& b);  // [M, K] x [K, N] -> [M, N]
Tensor matvec(const Tensor& a, const Tensor& x);  // [M, K] x [K]    -> [M]

Tensor sum(const Tensor& x);  // -> scalar

// Mean over entries of binary cross-entropy on sigmoid(logits), evaluated in
// the stable form max(z,0) - z*t + log1p(exp(-|z|)). Targets must be 0 or 1.
Tensor bce_with_logits_mean(const Tensor& logits, std::span<const double> targets);

}  // namespace subcam::ops
