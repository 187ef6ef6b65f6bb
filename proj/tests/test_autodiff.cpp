#include <doctest.h>

#include <cmath>
#include <functional>

#include "subcam/ops.hpp"
#include "subcam/rng.hpp"
#include "subcam/tensor.hpp"

using namespace subcam;

namespace {

// Central finite differences against the analytic gradient of an arbitrary
// scalar-valued graph over one leaf tensor.
double max_rel_error_fd(const std::function<Tensor(const Tensor&)>& f, Tensor leaf,
                        double h = 1e-5) {
  Tensor analytic_leaf = Tensor::from_values(leaf.shape(),
                                             std::vector<double>(leaf.values().begin(), leaf.values().end()),
                                             true);
  {
    ComputationTape tape;
    Tensor loss = f(analytic_leaf);
    tape.backward(loss);
  }
  double worst = 0.0;
  for (std::int64_t i = 0; i < leaf.size(); ++i) {
    auto eval = [&](double delta) {
      std::vector<double> vals(leaf.values().begin(), leaf.values().end());
      vals[static_cast<std::size_t>(i)] += delta;
      Tensor t = Tensor::from_values(leaf.shape(), std::move(vals));
      return f(t).scalar();
    };
    double fd = (eval(h) - eval(-h)) / (2.0 * h);
    double an = analytic_leaf.grad()[static_cast<std::size_t>(i)];
    double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("backward of sum gives all-ones gradient") {
  Tensor x = Tensor::from_values({4}, {1, -2, 3, 0.5}, true);
  ComputationTape tape;
  Tensor loss = ops::sum(x);
  tape.backward(loss);
  for (double g : x.grad()) CHECK(g == 1.0);
  CHECK(tape.num_recorded() == 0);  // cleared after backward
}

TEST_CASE("backward of sum of squares") {
  Tensor x = Tensor::from_values({2}, {1, 2}, true);
  ComputationTape tape;
  Tensor loss = ops::sum(ops::mul(x, x));
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("backward rejects non-scalar losses and foreign tapes") {
  Tensor x = Tensor::from_values({2}, {1, 2}, true);
  ComputationTape tape;
  Tensor vec = ops::mul(x, x);
  CHECK_THROWS_AS(tape.backward(vec), std::invalid_argument);
  Tensor plain = Tensor::from_values({1}, {3.0});
  CHECK_THROWS_AS(tape.backward(plain), std::invalid_argument);
}

TEST_CASE("gradient accumulation: backward of a sum equals sum of backwards") {
  Rng rng(17);
  std::vector<double> vals(6);
  for (double& v : vals) v = rng.uniform(-1, 1);

  Tensor x1 = Tensor::from_values({6}, vals, true);
  {
    ComputationTape tape;
    Tensor loss = ops::add(ops::sum(ops::mul(x1, x1)), ops::sum(ops::relu(x1)));
    tape.backward(loss);
  }

  Tensor x2 = Tensor::from_values({6}, vals, true);
  {
    ComputationTape tape;
    tape.backward(ops::sum(ops::mul(x2, x2)));
  }
  {
    ComputationTape tape;
    tape.backward(ops::sum(ops::relu(x2)));
  }
  for (int i = 0; i < 6; ++i) CHECK(x1.grad()[i] == doctest::Approx(x2.grad()[i]).epsilon(1e-15));
}

TEST_CASE("no recording without gradients or without a tape") {
  Tensor x = Tensor::from_values({2}, {1, 2});
  {
    ComputationTape tape;
    Tensor y = ops::mul(x, x);
    CHECK(tape.num_recorded() == 0);
    CHECK_FALSE(y.requires_grad());
  }
  Tensor xg = Tensor::from_values({2}, {1, 2}, true);
  Tensor y = ops::mul(xg, xg);  // no tape active
  CHECK_FALSE(y.requires_grad());
  CHECK_FALSE(y.has_grad());
}

TEST_CASE("finite differences validate every primitive") {
  Rng rng(23);

  SUBCASE("relu") {
    std::vector<double> v(8);
    for (double& x : v) x = rng.uniform(-1, 1);
    Tensor leaf = Tensor::from_values({8}, v);
    CHECK(max_rel_error_fd([](const Tensor& t) { return ops::sum(ops::relu(t)); }, leaf) < 1e-4);
  }
  SUBCASE("sigmoid") {
    std::vector<double> v(8);
    for (double& x : v) x = rng.uniform(-1, 1);
    Tensor leaf = Tensor::from_values({8}, v);
    CHECK(max_rel_error_fd([](const Tensor& t) { return ops::sum(ops::sigmoid(t)); }, leaf) < 1e-4);
  }
  SUBCASE("conv2d weight and input") {
    std::vector<double> in(5 * 4 * 2), wg(3 * 9 * 2);
    for (double& x : in) x = rng.uniform(-1, 1);
    for (double& x : wg) x = rng.uniform(-1, 1);
    Tensor img = Tensor::from_values({5, 4, 2}, in);
    Tensor w = Tensor::from_values({3, 3, 3, 2}, wg);
    auto via_w = [&img](const Tensor& t) { return ops::sum(ops::conv2d(img, t, 1)); };
    auto via_x = [&w](const Tensor& t) { return ops::sum(ops::conv2d(t, w, 1)); };
    CHECK(max_rel_error_fd(via_w, w) < 1e-4);
    CHECK(max_rel_error_fd(via_x, img) < 1e-4);
  }
  SUBCASE("strided conv2d") {
    std::vector<double> in(6 * 6 * 1), wg(2 * 9);
    for (double& x : in) x = rng.uniform(-1, 1);
    for (double& x : wg) x = rng.uniform(-1, 1);
    Tensor img = Tensor::from_values({6, 6, 1}, in);
    Tensor w = Tensor::from_values({2, 3, 3, 1}, wg);
    auto f = [&img](const Tensor& t) { return ops::sum(ops::conv2d(img, t, 1, 2)); };
    CHECK(max_rel_error_fd(f, w) < 1e-4);
  }
  SUBCASE("max_pool2") {
    std::vector<double> in(6 * 6 * 2);
    for (double& x : in) x = rng.uniform(-1, 1);
    Tensor leaf = Tensor::from_values({6, 6, 2}, in);
    CHECK(max_rel_error_fd([](const Tensor& t) { return ops::sum(ops::max_pool2(t)); }, leaf) < 1e-4);
  }
  SUBCASE("global_avg_pool") {
    std::vector<double> in(4 * 4 * 3);
    for (double& x : in) x = rng.uniform(-1, 1);
    Tensor leaf = Tensor::from_values({4, 4, 3}, in);
    CHECK(max_rel_error_fd([](const Tensor& t) { return ops::sum(ops::global_avg_pool(t)); }, leaf) <
          1e-4);
  }
  SUBCASE("matmul both sides") {
    std::vector<double> av(6), bv(8);
    for (double& x : av) x = rng.uniform(-1, 1);
    for (double& x : bv) x = rng.uniform(-1, 1);
    Tensor a = Tensor::from_values({3, 2}, av);
    Tensor b = Tensor::from_values({2, 4}, bv);
    CHECK(max_rel_error_fd([&b](const Tensor& t) { return ops::sum(ops::matmul(t, b)); }, a) < 1e-4);
    CHECK(max_rel_error_fd([&a](const Tensor& t) { return ops::sum(ops::matmul(a, t)); }, b) < 1e-4);
  }
  SUBCASE("matvec both sides") {
    std::vector<double> av(6), xv(2);
    for (double& x : av) x = rng.uniform(-1, 1);
    for (double& x : xv) x = rng.uniform(-1, 1);
    Tensor a = Tensor::from_values({3, 2}, av);
    Tensor x = Tensor::from_values({2}, xv);
    CHECK(max_rel_error_fd([&x](const Tensor& t) { return ops::sum(ops::matvec(t, x)); }, a) < 1e-4);
    CHECK(max_rel_error_fd([&a](const Tensor& t) { return ops::sum(ops::matvec(a, t)); }, x) < 1e-4);
  }
  SUBCASE("bias_add both sides") {
    std::vector<double> xv(3 * 2 * 2), bv(2);
    for (double& x : xv) x = rng.uniform(-1, 1);
    for (double& x : bv) x = rng.uniform(-1, 1);
    Tensor x = Tensor::from_values({3, 2, 2}, xv);
    Tensor b = Tensor::from_values({2}, bv);
    CHECK(max_rel_error_fd([&b](const Tensor& t) { return ops::sum(ops::bias_add(t, b)); }, x) < 1e-4);
    CHECK(max_rel_error_fd([&x](const Tensor& t) { return ops::sum(ops::bias_add(x, t)); }, b) < 1e-4);
  }
  SUBCASE("scale and mul") {
    std::vector<double> v(5);
    for (double& x : v) x = rng.uniform(-1, 1);
    Tensor leaf = Tensor::from_values({5}, v);
    CHECK(max_rel_error_fd([](const Tensor& t) { return ops::scale(ops::sum(t), 2.5); }, leaf) < 1e-4);
    CHECK(max_rel_error_fd([](const Tensor& t) { return ops::sum(ops::mul(t, t)); }, leaf) < 1e-4);
  }
  SUBCASE("bce_with_logits_mean") {
    std::vector<double> v(6), targets = {1, 0, 1, 1, 0, 0};
    for (double& x : v) x = rng.uniform(-2, 2);
    Tensor leaf = Tensor::from_values({6}, v);
    auto f = [&targets](const Tensor& t) { return ops::bce_with_logits_mean(t, targets); };
    CHECK(max_rel_error_fd(f, leaf) < 1e-4);
  }
}

TEST_CASE("five-layer random network gradients agree with finite differences") {
  Rng rng(41);
  // conv -> relu -> pool -> conv -> gap -> matvec -> bce
  std::vector<double> img(8 * 8 * 2), w1(3 * 9 * 2), w2(4 * 9 * 3), head(2 * 4);
  for (double& x : img) x = rng.uniform(-1, 1);
  for (double& x : w1) x = rng.uniform(-1, 1);
  for (double& x : w2) x = rng.uniform(-1, 1);
  for (double& x : head) x = rng.uniform(-1, 1);
  std::vector<double> targets = {1, 0};

  Tensor imgT = Tensor::from_values({8, 8, 2}, img);
  auto net = [&](const Tensor& w1t, const Tensor& w2t, const Tensor& ht) {
    Tensor a = ops::max_pool2(ops::relu(ops::conv2d(imgT, w1t, 1)));
    Tensor b = ops::relu(ops::conv2d(a, w2t, 1));
    Tensor pooled = ops::global_avg_pool(b);
    return ops::bce_with_logits_mean(ops::matvec(ht, pooled), targets);
  };

  Tensor w2T = Tensor::from_values({4, 3, 3, 3}, w2);
  Tensor headT = Tensor::from_values({2, 4}, head);
  CHECK(max_rel_error_fd(
            [&](const Tensor& t) { return net(t, w2T, headT); },
            Tensor::from_values({3, 3, 3, 2}, w1)) < 1e-4);
  Tensor w1T = Tensor::from_values({3, 3, 3, 2}, w1);
  CHECK(max_rel_error_fd(
            [&](const Tensor& t) { return net(w1T, t, headT); },
            Tensor::from_values({4, 3, 3, 3}, w2)) < 1e-4);
  CHECK(max_rel_error_fd(
            [&](const Tensor& t) { return net(w1T, w2T, t); },
            Tensor::from_values({2, 4}, head)) < 1e-4);
}

TEST_CASE("gradients stay finite through deep compositions") {
  Rng rng(2);
  std::vector<double> v(16);
  for (double& x : v) x = rng.uniform(-1, 1);
  Tensor x = Tensor::from_values({4, 4, 1}, v, true);
  ComputationTape tape;
  Tensor y = x;
  for (int i = 0; i < 3; ++i) y = ops::relu(ops::scale(y, 1.7));
  tape.backward(ops::sum(y));
  CHECK(x.has_grad());
  for (double g : x.grad()) CHECK(std::isfinite(g));
}
