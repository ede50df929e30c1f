#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "dmca/nn/grad_check.hpp"
#include "dmca/nn/layers.hpp"
#include "dmca/nn/optimizer.hpp"
#include "dmca/nn/param.hpp"
#include "dmca/util/errors.hpp"
#include "doctest.h"

using namespace dmca;
using nn::Activation;
using nn::Mat;
using nn::Vec;

namespace {

std::string temp_file(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

// Scalar reference for one LSTM step, written without Eigen on purpose.
struct ScalarLstmOut {
  double c, h;
};
ScalarLstmOut scalar_lstm_step(double x, double h_prev, double c_prev, const double wx[4],
                               const double wh[4], const double b[4]) {
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double i = sig(wx[0] * x + wh[0] * h_prev + b[0]);
  const double f = sig(wx[1] * x + wh[1] * h_prev + b[1]);
  const double o = sig(wx[2] * x + wh[2] * h_prev + b[2]);
  const double g = std::tanh(wx[3] * x + wh[3] * h_prev + b[3]);
  const double c = f * c_prev + i * g;
  return {c, o * std::tanh(c)};
}

}  // namespace

TEST_CASE("dense layer computes affine map plus activation") {
  std::mt19937_64 rng(7);
  nn::DenseLayer layer("d", 2, 2, Activation::Linear, rng);
  layer.weight().value << 1.0, 2.0, 3.0, 4.0;
  layer.bias().value << 0.5, -0.5;

  Vec x(2);
  x << 1.0, 1.0;
  Vec y = layer.forward(x);
  CHECK(y[0] == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(6.5).epsilon(1e-15));

  SUBCASE("relu clips negatives, passes positives") {
    nn::DenseLayer r("r", 1, 2, Activation::Relu, rng);
    r.weight().value << 1.0, -1.0;
    r.bias().value << 0.0, 0.0;
    Vec one(1);
    one << 2.0;
    Vec out = r.forward(one);
    CHECK(out[0] == 2.0);
    CHECK(out[1] == 0.0);
  }
  SUBCASE("sigmoid of zero preactivation is one half") {
    nn::DenseLayer s("s", 1, 1, Activation::Sigmoid, rng);
    s.weight().value.setZero();
    s.bias().value.setZero();
    Vec one(1);
    one << 123.0;
    CHECK(s.forward(one)[0] == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("dense layer rejects wrong input width and stale tapes") {
  std::mt19937_64 rng(7);
  nn::DenseLayer layer("d", 3, 2, Activation::Tanh, rng);
  CHECK_THROWS_AS(layer.forward(Vec::Zero(2)), StateError);
  CHECK_THROWS_AS(layer.backward(Vec::Zero(2)), StateError);  // nothing recorded
  layer.forward(Vec::Zero(3));
  layer.backward(Vec::Zero(2));
  CHECK_THROWS_AS(layer.backward(Vec::Zero(2)), StateError);  // tape consumed
}

TEST_CASE("initial weights stay within the fan bound and depend on the seed") {
  std::mt19937_64 rng_a(3), rng_b(3), rng_c(4);
  nn::DenseLayer a("a", 20, 10, Activation::Relu, rng_a);
  nn::DenseLayer b("b", 20, 10, Activation::Relu, rng_b);
  nn::DenseLayer c("c", 20, 10, Activation::Relu, rng_c);
  const double bound = std::sqrt(6.0 / 30.0);
  CHECK(a.weight().value.cwiseAbs().maxCoeff() <= bound);
  CHECK(a.weight().value == b.weight().value);
  CHECK(a.weight().value != c.weight().value);
  CHECK(a.bias().value.isZero());
}

TEST_CASE("mlp gradients match central differences") {
  nn::Mlp net("m", {3, 8, 8, 2}, {Activation::Tanh, Activation::Tanh, Activation::Sigmoid}, 11);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec x(3), target(2);
  for (int i = 0; i < 3; ++i) x[i] = gauss(rng);
  for (int i = 0; i < 2; ++i) target[i] = gauss(rng);

  auto loss_of_forward = [&](Vec y) { return (y - target).squaredNorm(); };
  auto loss_fn = [&]() {
    net.set_recording(false);
    double v = loss_of_forward(net.forward(x));
    net.set_recording(true);
    return v;
  };
  auto grad_fn = [&]() {
    Vec y = net.forward(x);
    net.backward(2.0 * (y - target));
    return loss_of_forward(y);
  };
  CHECK(nn::grad_check(net.params(), loss_fn, grad_fn) < 1e-6);
}

TEST_CASE("mlp input gradient matches central differences") {
  nn::Mlp net("m", {4, 6, 1}, {Activation::Tanh, Activation::Linear}, 21);
  Vec x(4);
  x << 0.3, -0.2, 0.9, 0.1;
  net.set_recording(true);
  net.forward(x);
  Vec dx = net.backward(Vec::Ones(1));
  const double eps = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Vec xp = x, xm = x;
    xp[i] += eps;
    xm[i] -= eps;
    net.set_recording(false);
    const double numeric = (net.forward(xp)[0] - net.forward(xm)[0]) / (2 * eps);
    net.set_recording(true);
    CHECK(dx[i] == doctest::Approx(numeric).epsilon(1e-5));
  }
}

TEST_CASE("lstm forward matches a scalar reference implementation") {
  std::mt19937_64 rng(9);
  nn::LstmCell cell("u", 1, 1, rng);
  const double wx[4] = {0.3, -0.2, 0.5, 0.8};
  const double wh[4] = {-0.4, 0.6, 0.1, -0.7};
  const double b[4] = {0.05, 1.0, -0.1, 0.2};
  for (int g = 0; g < 4; ++g) {
    cell.params()[0]->value(g, 0) = wx[g];
    cell.params()[1]->value(g, 0) = wh[g];
    cell.params()[2]->value(g, 0) = b[g];
  }

  nn::LstmState s = nn::LstmState::zero(1);
  double h = 0.0, c = 0.0;
  Vec x(1);
  for (double xv : {0.7, -0.3, 1.2}) {
    x[0] = xv;
    s = cell.forward(x, s);
    ScalarLstmOut ref = scalar_lstm_step(xv, h, c, wx, wh, b);
    h = ref.h;
    c = ref.c;
    CHECK(s.cell[0] == doctest::Approx(c).epsilon(1e-14));
    CHECK(s.hidden[0] == doctest::Approx(h).epsilon(1e-14));
  }
}

TEST_CASE("fresh lstm starts with forget bias one and zero other biases") {
  std::mt19937_64 rng(1);
  nn::LstmCell cell("u", 2, 3, rng);
  const Mat& b = cell.params()[2]->value;
  for (int u = 0; u < 3; ++u) {
    CHECK(b(u, 0) == 0.0);           // input gate
    CHECK(b(3 + u, 0) == 1.0);       // forget gate
    CHECK(b(6 + u, 0) == 0.0);       // output gate
    CHECK(b(9 + u, 0) == 0.0);       // candidate
  }
}

TEST_CASE("lstm backpropagation through time matches central differences") {
  std::mt19937_64 rng(13);
  nn::LstmCell cell("u", 1, 2, rng);
  std::vector<double> xs = {0.4, -0.6, 0.9};
  const double target = 0.3;

  // Loss: squared error of the sum of the final hidden state.
  auto run = [&](bool record) {
    cell.set_recording(record);
    nn::LstmState s = nn::LstmState::zero(2);
    Vec x(1);
    for (double xv : xs) {
      x[0] = xv;
      s = cell.forward(x, s);
    }
    cell.set_recording(true);
    return s;
  };
  auto loss_fn = [&]() {
    const double v = run(false).hidden.sum() - target;
    return v * v;
  };
  auto grad_fn = [&]() {
    nn::LstmState s = run(true);
    const double v = s.hidden.sum() - target;
    Vec dh = Vec::Constant(2, 2.0 * v);
    Vec dc = Vec::Zero(2);
    for (size_t i = xs.size(); i-- > 0;) {
      nn::LstmGrad g = cell.backward(dh, dc);
      dh = g.dh_prev;
      dc = g.dc_prev;
    }
    return v * v;
  };
  CHECK(nn::grad_check(cell.params(), loss_fn, grad_fn) < 1e-6);
}

TEST_CASE("soft update blends values and converges geometrically") {
  std::mt19937_64 rng(2);
  nn::DenseLayer online("o", 2, 2, Activation::Linear, rng);
  nn::DenseLayer target("t", 2, 2, Activation::Linear, rng);
  online.weight().value.setConstant(1.0);
  target.weight().value.setConstant(0.0);

  nn::soft_update(target.params(), online.params(), 0.01);
  CHECK(target.weight().value(0, 0) == doctest::Approx(0.01).epsilon(1e-15));

  for (int i = 0; i < 200; ++i) nn::soft_update(target.params(), online.params(), 0.01);
  const double expect = 1.0 - std::pow(0.99, 201);
  CHECK(target.weight().value(1, 1) == doctest::Approx(expect).epsilon(1e-12));

  SUBCASE("tau=1 copies outright") {
    nn::soft_update(target.params(), online.params(), 1.0);
    CHECK(target.weight().value == online.weight().value);
  }
  SUBCASE("mismatched shapes are rejected") {
    nn::DenseLayer other("x", 3, 2, Activation::Linear, rng);
    CHECK_THROWS_AS(nn::soft_update(target.params(), other.params(), 0.5), StateError);
  }
}

TEST_CASE("checkpoints round-trip values and metadata exactly") {
  nn::Mlp net("m", {3, 4, 2}, {Activation::Relu, Activation::Linear}, 31);
  const std::string path = temp_file("dmca_nn_ckpt.txt");
  nn::save_params(path, net.params(), {{"kind", "test"}, {"hidden", "4"}});

  nn::Mlp other("m", {3, 4, 2}, {Activation::Relu, Activation::Linear}, 99);
  REQUIRE(other.params()[0]->value != net.params()[0]->value);
  auto meta = nn::load_params(path, other.params());
  for (size_t i = 0; i < net.params().size(); ++i)
    CHECK(other.params()[i]->value == net.params()[i]->value);  // bit-exact
  bool saw_kind = false;
  for (auto& [k, v] : meta)
    if (k == "kind" && v == "test") saw_kind = true;
  CHECK(saw_kind);

  SUBCASE("loading into mismatched shapes fails") {
    nn::Mlp wrong("m", {3, 5, 2}, {Activation::Relu, Activation::Linear}, 1);
    CHECK_THROWS_AS(nn::load_params(path, wrong.params()), DataError);
  }
  SUBCASE("missing checkpoint file is reported as a missing artifact") {
    CHECK_THROWS_AS(nn::load_params(temp_file("definitely_absent_ckpt.txt"), other.params()),
                    MissingArtifactError);
  }
  std::remove(path.c_str());
}

TEST_CASE("gradient descent applies lr * grad and skips poisoned updates") {
  nn::Param p("p", 1, 1);
  p.value(0, 0) = 2.0;
  p.grad(0, 0) = 0.5;
  nn::GradientDescent opt(0.1);
  CHECK(opt.step({&p}));
  CHECK(p.value(0, 0) == doctest::Approx(1.95).epsilon(1e-15));

  p.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(opt.step({&p}));
  CHECK(p.value(0, 0) == doctest::Approx(1.95).epsilon(1e-15));  // untouched
}

TEST_CASE("adam first step moves by about lr in the gradient direction") {
  nn::Param p("p", 1, 1);
  p.value(0, 0) = 1.0;
  p.grad(0, 0) = 3.0;
  nn::Adam opt(0.01);
  CHECK(opt.step({&p}));
  // mhat = g, vhat = g^2, so the step is lr * g / (|g| + eps) ~ lr.
  CHECK(p.value(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-6));

  SUBCASE("non-finite gradients freeze the state") {
    const double before = p.value(0, 0);
    p.grad(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(opt.step({&p}));
    CHECK(p.value(0, 0) == before);
  }
}

TEST_CASE("global norm clip rescales to the bound and reports the raw norm") {
  nn::Param a("a", 1, 1), b("b", 1, 1);
  a.grad(0, 0) = 3.0;
  b.grad(0, 0) = 4.0;  // norm 5
  const double raw = nn::clip_global_norm({&a, &b}, 1.0);
  CHECK(raw == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(a.grad(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(b.grad(0, 0) == doctest::Approx(0.8).epsilon(1e-12));

  SUBCASE("norms under the bound pass through") {
    a.grad(0, 0) = 0.1;
    b.grad(0, 0) = 0.1;
    nn::clip_global_norm({&a, &b}, 1.0);
    CHECK(a.grad(0, 0) == 0.1);
  }
  SUBCASE("non-positive bound disables clipping") {
    a.grad(0, 0) = 30.0;
    b.grad(0, 0) = 40.0;
    CHECK(nn::clip_global_norm({&a, &b}, 0.0) == doctest::Approx(50.0));
    CHECK(a.grad(0, 0) == 30.0);
  }
}

TEST_CASE("descent on a fixed quadratic reaches the optimum") {
  // f(w) = (w - 3)^2 via the optimizer heads only.
  nn::Param w("w", 1, 1);
  nn::Adam opt(0.05);
  for (int i = 0; i < 2000; ++i) {
    w.grad(0, 0) = 2.0 * (w.value(0, 0) - 3.0);
    opt.step({&w});
  }
  CHECK(w.value(0, 0) == doctest::Approx(3.0).epsilon(1e-4));
}
