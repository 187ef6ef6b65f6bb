#include "subcam/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "subcam/util.hpp"

namespace subcam::ops {

namespace {

[[noreturn]] void shape_fail(const std::string& op, const std::string& detail) {
  throw std::invalid_argument(op + ": " + detail);
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    shape_fail(op, "shape mismatch between " + shape_to_string(a.shape()) + " and " +
                       shape_to_string(b.shape()));
  }
}

void record_if_needed(Tensor& out, std::function<void()> fn) {
  if (out.requires_grad()) ComputationTape::active()->record(std::move(fn));
}

double stable_sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  Tensor result = make_op_output(x.shape(), std::move(out), {x});
  record_if_needed(result, [x, result]() {
    auto* xn = node_of(x);
    if (!xn->requires_grad) return;
    auto* rn = node_of(result);
    for (std::size_t i = 0; i < xn->value.size(); ++i) {
      if (xn->value[i] > 0.0) xn->grad[i] += rn->grad[i];
    }
  });
  return result;
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(x.values()[i]);
  Tensor result = make_op_output(x.shape(), std::move(out), {x});
  record_if_needed(result, [x, result]() {
    auto* xn = node_of(x);
    if (!xn->requires_grad) return;
    auto* rn = node_of(result);
    for (std::size_t i = 0; i < xn->value.size(); ++i) {
      double s = rn->value[i];
      xn->grad[i] += rn->grad[i] * s * (1.0 - s);
    }
  });
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  Tensor result = make_op_output(a.shape(), std::move(out), {a, b});
  record_if_needed(result, [a, b, result]() {
    auto* rn = node_of(result);
    for (const Tensor& t : {a, b}) {
      auto* n = node_of(t);
      if (!n->requires_grad) continue;
      for (std::size_t i = 0; i < n->value.size(); ++i) n->grad[i] += rn->grad[i];
    }
  });
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  Tensor result = make_op_output(a.shape(), std::move(out), {a, b});
  record_if_needed(result, [a, b, result]() {
    auto* an = node_of(a);
    auto* bn = node_of(b);
    auto* rn = node_of(result);
    if (an->requires_grad) {
      for (std::size_t i = 0; i < an->value.size(); ++i) an->grad[i] += rn->grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      for (std::size_t i = 0; i < bn->value.size(); ++i) bn->grad[i] += rn->grad[i] * an->value[i];
    }
  });
  return result;
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x.values()[i];
  Tensor result = make_op_output(x.shape(), std::move(out), {x});
  record_if_needed(result, [x, result, factor]() {
    auto* xn = node_of(x);
    // factor == 0 contributes nothing; skipping keeps x's gradient bytes
    // untouched so a zero-weighted term is exactly absent.
    if (!xn->requires_grad || factor == 0.0) return;
    auto* rn = node_of(result);
    for (std::size_t i = 0; i < xn->value.size(); ++i) xn->grad[i] += factor * rn->grad[i];
  });
  return result;
}

Tensor conv2d(const Tensor& x, const Tensor& weight, int padding, int stride) {
  if (x.ndim() != 3) shape_fail("conv2d", "input must be [H,W,C], got " + shape_to_string(x.shape()));
  if (weight.ndim() != 4) {
    shape_fail("conv2d", "weight must be [Cout,Kh,Kw,Cin], got " + shape_to_string(weight.shape()));
  }
  if (padding < 0 || stride < 1) shape_fail("conv2d", "padding must be >= 0 and stride >= 1");
  const int h = x.dim(0), w = x.dim(1), cin = x.dim(2);
  const int cout = weight.dim(0), kh = weight.dim(1), kw = weight.dim(2);
  if (weight.dim(3) != cin) {
    shape_fail("conv2d", "weight shape " + shape_to_string(weight.shape()) + " expects " +
                             std::to_string(weight.dim(3)) + " input channels, input shape " +
                             shape_to_string(x.shape()) + " has " + std::to_string(cin));
  }
  if (h + 2 * padding < kh || w + 2 * padding < kw) {
    shape_fail("conv2d", "kernel " + shape_to_string(weight.shape()) + " larger than padded input " +
                             shape_to_string(x.shape()));
  }
  const int oh = (h + 2 * padding - kh) / stride + 1;
  const int ow = (w + 2 * padding - kw) / stride + 1;

  // Weights repacked to [kh][kw][cin][cout] so the inner accumulation runs
  // over contiguous output channels (vectorizes without reassociation).
  std::vector<double> wp(static_cast<std::size_t>(kh) * kw * cin * cout);
  {
    const double* wsrc = weight.values().data();
    for (int co = 0; co < cout; ++co) {
      for (int a = 0; a < kh; ++a) {
        for (int b = 0; b < kw; ++b) {
          for (int ci = 0; ci < cin; ++ci) {
            wp[(((static_cast<std::size_t>(a) * kw + b) * cin + ci) * cout) + co] =
                wsrc[((static_cast<std::size_t>(co) * kh + a) * kw + b) * cin + ci];
          }
        }
      }
    }
  }

  std::vector<double> out(static_cast<std::size_t>(oh) * ow * cout, 0.0);
  const double* in = x.values().data();
  for (int oy = 0; oy < oh; ++oy) {
    const int iy0 = oy * stride - padding;
    for (int ox = 0; ox < ow; ++ox) {
      const int ix0 = ox * stride - padding;
      double* orow = &out[(static_cast<std::size_t>(oy) * ow + ox) * cout];
      for (int a = 0; a < kh; ++a) {
        const int iy = iy0 + a;
        if (iy < 0 || iy >= h) continue;
        for (int b = 0; b < kw; ++b) {
          const int ix = ix0 + b;
          if (ix < 0 || ix >= w) continue;
          const double* irow = &in[(static_cast<std::size_t>(iy) * w + ix) * cin];
          const double* wrow = &wp[(static_cast<std::size_t>(a) * kw + b) * cin * cout];
          for (int ci = 0; ci < cin; ++ci) {
            const double v = irow[ci];
            const double* wv = wrow + static_cast<std::size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) orow[co] += v * wv[co];
          }
        }
      }
    }
  }

  Tensor result = make_op_output({oh, ow, cout}, std::move(out), {x, weight});
  record_if_needed(result, [x, weight, result, padding, stride, h, w, cin, cout, kh, kw, oh, ow]() {
    auto* xn = node_of(x);
    auto* wn = node_of(weight);
    auto* rn = node_of(result);
    const double* go = rn->grad.data();
    const double* in = xn->value.data();

    if (wn->requires_grad) {
      double* dw = wn->grad.data();
      for (int oy = 0; oy < oh; ++oy) {
        const int iy0 = oy * stride - padding;
        for (int ox = 0; ox < ow; ++ox) {
          const int ix0 = ox * stride - padding;
          const double* grow = &go[(static_cast<std::size_t>(oy) * ow + ox) * cout];
          for (int a = 0; a < kh; ++a) {
            const int iy = iy0 + a;
            if (iy < 0 || iy >= h) continue;
            for (int b = 0; b < kw; ++b) {
              const int ix = ix0 + b;
              if (ix < 0 || ix >= w) continue;
              const double* irow = &in[(static_cast<std::size_t>(iy) * w + ix) * cin];
              for (int co = 0; co < cout; ++co) {
                const double g = grow[co];
                double* dwrow = &dw[((static_cast<std::size_t>(co) * kh + a) * kw + b) * cin];
                for (int ci = 0; ci < cin; ++ci) dwrow[ci] += g * irow[ci];
              }
            }
          }
        }
      }
    }

    if (xn->requires_grad) {
      // [kh][kw][cout][cin] pack: the din accumulation runs over contiguous
      // input channels.
      std::vector<double> wt(static_cast<std::size_t>(kh) * kw * cout * cin);
      const double* wsrc = wn->value.data();
      for (int co = 0; co < cout; ++co) {
        for (int a = 0; a < kh; ++a) {
          for (int b = 0; b < kw; ++b) {
            for (int ci = 0; ci < cin; ++ci) {
              wt[(((static_cast<std::size_t>(a) * kw + b) * cout + co) * cin) + ci] =
                  wsrc[((static_cast<std::size_t>(co) * kh + a) * kw + b) * cin + ci];
            }
          }
        }
      }
      double* din = xn->grad.data();
      for (int oy = 0; oy < oh; ++oy) {
        const int iy0 = oy * stride - padding;
        for (int ox = 0; ox < ow; ++ox) {
          const int ix0 = ox * stride - padding;
          const double* grow = &go[(static_cast<std::size_t>(oy) * ow + ox) * cout];
          for (int a = 0; a < kh; ++a) {
            const int iy = iy0 + a;
            if (iy < 0 || iy >= h) continue;
            for (int b = 0; b < kw; ++b) {
              const int ix = ix0 + b;
              if (ix < 0 || ix >= w) continue;
              double* dirow = &din[(static_cast<std::size_t>(iy) * w + ix) * cin];
              const double* wrow = &wt[(static_cast<std::size_t>(a) * kw + b) * cout * cin];
              for (int co = 0; co < cout; ++co) {
                const double g = grow[co];
                const double* wv = wrow + static_cast<std::size_t>(co) * cin;
                for (int ci = 0; ci < cin; ++ci) dirow[ci] += g * wv[ci];
              }
            }
          }
        }
      }
    }
  });
  return result;
}

Tensor bias_add(const Tensor& x, const Tensor& bias) {
  if (bias.ndim() != 1) shape_fail("bias_add", "bias must be 1-D, got " + shape_to_string(bias.shape()));
  const int c = bias.dim(0);
  if (x.dim(x.ndim() - 1) != c) {
    shape_fail("bias_add", "input " + shape_to_string(x.shape()) + " last dimension does not match bias " +
                               shape_to_string(bias.shape()));
  }
  const std::size_t rows = static_cast<std::size_t>(x.size()) / c;
  std::vector<double> out(x.values().size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* irow = x.values().data() + r * c;
    double* orow = out.data() + r * c;
    for (int i = 0; i < c; ++i) orow[i] = irow[i] + bias.values()[i];
  }
  Tensor result = make_op_output(x.shape(), std::move(out), {x, bias});
  record_if_needed(result, [x, bias, result, rows, c]() {
    auto* xn = node_of(x);
    auto* bn = node_of(bias);
    auto* rn = node_of(result);
    const double* go = rn->grad.data();
    if (xn->requires_grad) {
      for (std::size_t i = 0; i < xn->value.size(); ++i) xn->grad[i] += go[i];
    }
    if (bn->requires_grad) {
      for (std::size_t r = 0; r < rows; ++r) {
        const double* grow = go + r * c;
        for (int i = 0; i < c; ++i) bn->grad[i] += grow[i];
      }
    }
  });
  return result;
}

Tensor max_pool2(const Tensor& x) {
  if (x.ndim() != 3) shape_fail("max_pool2", "input must be [H,W,C], got " + shape_to_string(x.shape()));
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  if (h < 2 || w < 2) shape_fail("max_pool2", "input " + shape_to_string(x.shape()) + " smaller than 2x2");
  const int oh = h / 2, ow = w / 2;
  std::vector<double> out(static_cast<std::size_t>(oh) * ow * c);
  // Winning window position (0..3, row-major in the 2x2 window); ties go to
  // the first position scanned.
  auto argmax = std::make_shared<std::vector<std::uint8_t>>(out.size());
  const double* in = x.values().data();
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        double best = -1.0;
        std::uint8_t besti = 0;
        bool first = true;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            double v = in[((static_cast<std::size_t>(2 * oy + dy)) * w + (2 * ox + dx)) * c + ch];
            if (first || v > best) {
              best = v;
              besti = static_cast<std::uint8_t>(dy * 2 + dx);
              first = false;
            }
          }
        }
        std::size_t oi = (static_cast<std::size_t>(oy) * ow + ox) * c + ch;
        out[oi] = best;
        (*argmax)[oi] = besti;
      }
    }
  }
  Tensor result = make_op_output({oh, ow, c}, std::move(out), {x});
  record_if_needed(result, [x, result, argmax, w, c, oh, ow]() {
    auto* xn = node_of(x);
    if (!xn->requires_grad) return;
    auto* rn = node_of(result);
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int ch = 0; ch < c; ++ch) {
          std::size_t oi = (static_cast<std::size_t>(oy) * ow + ox) * c + ch;
          int dy = (*argmax)[oi] / 2, dx = (*argmax)[oi] % 2;
          xn->grad[((static_cast<std::size_t>(2 * oy + dy)) * w + (2 * ox + dx)) * c + ch] += rn->grad[oi];
        }
      }
    }
  });
  return result;
}

Tensor global_avg_pool(const Tensor& x) {
  if (x.ndim() != 3) {
    shape_fail("global_avg_pool", "input must be [H,W,C], got " + shape_to_string(x.shape()));
  }
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  std::vector<double> out(static_cast<std::size_t>(c), 0.0);
  const double* in = x.values().data();
  for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
    const double* irow = in + p * c;
    for (int ch = 0; ch < c; ++ch) out[ch] += irow[ch];
  }
  for (int ch = 0; ch < c; ++ch) out[ch] *= inv;
  Tensor result = make_op_output({c}, std::move(out), {x});
  record_if_needed(result, [x, result, h, w, c, inv]() {
    auto* xn = node_of(x);
    if (!xn->requires_grad) return;
    auto* rn = node_of(result);
    for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
      double* drow = xn->grad.data() + p * c;
      for (int ch = 0; ch < c; ++ch) drow[ch] += rn->grad[ch] * inv;
    }
  });
  return result;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    shape_fail("matmul", "incompatible shapes " + shape_to_string(a.shape()) + " and " +
                             shape_to_string(b.shape()));
  }
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    double* orow = &out[static_cast<std::size_t>(i) * n];
    for (int j = 0; j < k; ++j) {
      const double v = a.values()[static_cast<std::size_t>(i) * k + j];
      const double* brow = &b.values()[static_cast<std::size_t>(j) * n];
      for (int l = 0; l < n; ++l) orow[l] += v * brow[l];
    }
  }
  Tensor result = make_op_output({m, n}, std::move(out), {a, b});
  record_if_needed(result, [a, b, result, m, k, n]() {
    auto* an = node_of(a);
    auto* bn = node_of(b);
    auto* rn = node_of(result);
    const double* go = rn->grad.data();
    if (an->requires_grad) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) {
          double acc = 0.0;
          const double* grow = go + static_cast<std::size_t>(i) * n;
          const double* brow = bn->value.data() + static_cast<std::size_t>(j) * n;
          for (int l = 0; l < n; ++l) acc += grow[l] * brow[l];
          an->grad[static_cast<std::size_t>(i) * k + j] += acc;
        }
      }
    }
    if (bn->requires_grad) {
      for (int i = 0; i < m; ++i) {
        const double* grow = go + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < k; ++j) {
          const double v = an->value[static_cast<std::size_t>(i) * k + j];
          double* drow = bn->grad.data() + static_cast<std::size_t>(j) * n;
          for (int l = 0; l < n; ++l) drow[l] += v * grow[l];
        }
      }
    }
  });
  return result;
}

Tensor matvec(const Tensor& a, const Tensor& x) {
  if (a.ndim() != 2 || x.ndim() != 1 || a.dim(1) != x.dim(0)) {
    shape_fail("matvec", "incompatible shapes " + shape_to_string(a.shape()) + " and " +
                             shape_to_string(x.shape()));
  }
  const int m = a.dim(0), k = a.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    const double* arow = &a.values()[static_cast<std::size_t>(i) * k];
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += arow[j] * x.values()[j];
    out[i] = acc;
  }
  Tensor result = make_op_output({m}, std::move(out), {a, x});
  record_if_needed(result, [a, x, result, m, k]() {
    auto* an = node_of(a);
    auto* xn = node_of(x);
    auto* rn = node_of(result);
    for (int i = 0; i < m; ++i) {
      const double g = rn->grad[i];
      if (an->requires_grad) {
        double* drow = an->grad.data() + static_cast<std::size_t>(i) * k;
        for (int j = 0; j < k; ++j) drow[j] += g * xn->value[j];
      }
      if (xn->requires_grad) {
        const double* arow = an->value.data() + static_cast<std::size_t>(i) * k;
        for (int j = 0; j < k; ++j) xn->grad[j] += g * arow[j];
      }
    }
  });
  return result;
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  Tensor result = make_op_output({1}, {acc}, {x});
  record_if_needed(result, [x, result]() {
    auto* xn = node_of(x);
    if (!xn->requires_grad) return;
    const double g = node_of(result)->grad[0];
    for (std::size_t i = 0; i < xn->grad.size(); ++i) xn->grad[i] += g;
  });
  return result;
}

Tensor bce_with_logits_mean(const Tensor& logits, std::span<const double> targets) {
  if (static_cast<std::size_t>(logits.size()) != targets.size()) {
    shape_fail("bce_with_logits_mean",
               "logits " + shape_to_string(logits.shape()) + " do not match " +
                   std::to_string(targets.size()) + " targets");
  }
  if (targets.empty()) shape_fail("bce_with_logits_mean", "empty targets");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] != 0.0 && targets[i] != 1.0) {
      throw std::invalid_argument("bce_with_logits_mean: target at index " + std::to_string(i) +
                                  " is " + std::to_string(targets[i]) + ", must be 0 or 1");
    }
  }
  const double inv = 1.0 / static_cast<double>(targets.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double z = logits.values()[i];
    acc += std::max(z, 0.0) - z * targets[i] + std::log1p(std::exp(-std::abs(z)));
  }
  std::vector<double> tcopy(targets.begin(), targets.end());
  Tensor result = make_op_output({1}, {acc * inv}, {logits});
  record_if_needed(result, [logits, result, tcopy = std::move(tcopy), inv]() {
    auto* ln = node_of(logits);
    if (!ln->requires_grad) return;
    const double g = node_of(result)->grad[0] * inv;
    for (std::size_t i = 0; i < tcopy.size(); ++i) {
      ln->grad[i] += g * (stable_sigmoid(ln->value[i]) - tcopy[i]);
    }
  });
  return result;
}

}  // namespace subcam::ops
