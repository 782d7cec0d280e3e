#include "doctest.h"

#include "cdnn/error.hpp"
#include "cdnn/nn/network.hpp"
#include "cdnn/nn/optimizer.hpp"
#include "cdnn/nn/training.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace cdnn;
using namespace cdnn::nn;

namespace {

Network random_network(Architecture arch, std::uint64_t seed) {
  Network net(std::move(arch));
  std::mt19937_64 rng(seed);
  glorot_initialize(net, rng);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (auto& p : net.mutable_parameters())
    for (Eigen::Index i = 0; i < p.bias.size(); ++i) p.bias(i) = noise(rng);
  return net;
}

Batch random_batch(std::size_t d, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  Batch b;
  b.x.resize(static_cast<Eigen::Index>(d), n);
  b.t.resize(n);
  b.y.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) b.x(i, j) = normal(rng);
    b.t(j) = coin(rng) ? 1.0 : 0.0;
    b.y(j) = normal(rng);
  }
  return b;
}

bool bitwise_equal(const ParameterSet& a, const ParameterSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].weight.size() != b[l].weight.size() || a[l].bias.size() != b[l].bias.size())
      return false;
    if (std::memcmp(a[l].weight.data(), b[l].weight.data(),
                    sizeof(double) * static_cast<std::size_t>(a[l].weight.size())) != 0)
      return false;
    if (std::memcmp(a[l].bias.data(), b[l].bias.data(),
                    sizeof(double) * static_cast<std::size_t>(a[l].bias.size())) != 0)
      return false;
  }
  return true;
}

// Straight-line recomputation of the forward pass, no Eigen products.
double hand_forward(const Network& net, const std::vector<double>& x, double t) {
  std::vector<double> raw = x;
  raw.push_back(t);
  std::vector<double> h;
  const auto& params = net.parameters();
  for (std::size_t l = 0; l < params.size(); ++l) {
    std::vector<double> in = l == 0 ? raw : h;
    if (l > 0 && net.architecture().concat_to_all_layers) in.insert(in.end(), raw.begin(), raw.end());
    std::vector<double> out(static_cast<std::size_t>(params[l].weight.rows()));
    for (std::size_t r = 0; r < out.size(); ++r) {
      double s = params[l].bias(static_cast<Eigen::Index>(r));
      for (std::size_t c = 0; c < in.size(); ++c)
        s += params[l].weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * in[c];
      const bool last = l + 1 == params.size();
      out[r] = last ? s : s / (1.0 + std::exp(-s));
    }
    h = std::move(out);
  }
  return h[0];
}

}  // namespace

TEST_CASE("swish reference values") {
  CHECK(swish(0.0) == 0.0);
  CHECK(swish(1.0) == doctest::Approx(0.7310585786300048792).epsilon(1e-15));
  CHECK(swish(-20.0) == doctest::Approx(-4.122307236380407163e-8).epsilon(1e-13));
  CHECK(swish(5.0) == doctest::Approx(4.966535745378575722).epsilon(1e-15));
  CHECK(swish(-30.0) == doctest::Approx(-2.807286890651789686e-12).epsilon(1e-12));
}

TEST_CASE("swish saturates without overflow") {
  for (double z : {700.0, -700.0, 750.0, -750.0, 1e6, -1e6}) {
    CHECK(std::isfinite(swish(z)));
    CHECK(std::isfinite(swish_derivative(z)));
  }
  CHECK(swish(700.0) == 700.0);
  CHECK(std::abs(swish(-700.0)) < 1e-290);
}

TEST_CASE("swish equals z * logistic(z) over a grid") {
  for (int i = -3000; i <= 3000; ++i) {
    const double z = i * 0.01;
    CHECK(swish(z) - z * logistic(z) == 0.0);
  }
}

TEST_CASE("swish derivative matches finite differences") {
  for (double z = -10.0; z <= 10.0; z += 0.37) {
    const double h = 1e-6;
    const double fd = (swish(z + h) - swish(z - h)) / (2 * h);
    CHECK(swish_derivative(z) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("layer layout accounts for inputConcat") {
  Architecture arch;
  arch.covariate_width = 3;
  arch.hidden_widths = {5, 4};
  Network plain(arch);
  CHECK(plain.layers()[1].input_width == 5);
  CHECK(plain.treatment_column(0) == 3);
  CHECK_FALSE(plain.treatment_column(1).has_value());
  CHECK(plain.parameter_count() == 5 * 5 + 4 * 6 + 5);

  arch.concat_to_all_layers = true;
  Network concat(arch);
  CHECK(concat.layers()[1].input_width == 5 + 4);
  CHECK(concat.layers()[2].input_width == 4 + 4);
  CHECK(concat.treatment_column(1) == 5 + 3);
  CHECK(concat.covariate_offset(2) == 4);
  CHECK(FreezeMask::none(concat).matches(concat));
}

TEST_CASE("forward: identity construction reproduces the linear map") {
  Architecture arch;
  arch.covariate_width = 2;
  arch.hidden_widths = {2};
  arch.hidden_activation = Activation::identity;
  Network net(arch);
  auto& p = net.mutable_parameters();
  p[0].weight << 1, 0, 0,
                 0, 1, 0;
  p[1].weight << 3.0, 0.5;
  p[1].bias << -1.0;
  const std::vector<double> x{1.0, 2.0};
  CHECK(forward(net, x, 1.0).prediction == 3.0 * 1.0 + 0.5 * 2.0 - 1.0);
}

TEST_CASE("forward: zero parameters give zero") {
  Architecture arch;
  arch.covariate_width = 4;
  Network net(arch);
  const std::vector<double> x{1.0, -2.0, 3.0, 0.5};
  CHECK(predict(net, x, 1.0) == 0.0);
  CHECK(predict(net, x, 0.0) == 0.0);
}

TEST_CASE("forward matches straight-line arithmetic oracle") {
  for (bool concat : {false, true}) {
    Architecture arch;
    arch.covariate_width = 3;
    arch.hidden_widths = {6, 4};
    arch.concat_to_all_layers = concat;
    const Network net = random_network(arch, 17);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x{normal(rng), normal(rng), normal(rng)};
      const double t = k % 2;
      CHECK(predict(net, x, t) == doctest::Approx(hand_forward(net, x, t)).epsilon(1e-13));
    }
  }
}

TEST_CASE("forward rejects wrong covariate width") {
  Architecture arch;
  arch.covariate_width = 2;
  Network net(arch);
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(forward(net, x, 0.0), InputShapeError);
  CHECK_THROWS_AS(predict_batch(net, Eigen::MatrixXd::Zero(3, 4), Eigen::RowVectorXd::Zero(4)),
                  InputShapeError);
}

TEST_CASE("backward: single linear parameter") {
  Architecture arch;
  arch.covariate_width = 1;
  arch.hidden_widths = {};
  Network net(arch);
  net.mutable_parameters()[0].weight(0, 0) = 0.7;
  const std::vector<double> x{3.0};
  auto fr = forward(net, x, 0.0);
  const auto g = backward(net, fr.cache, 1.0);
  CHECK(g[0].weight(0, 0) == 3.0);
  CHECK(g[0].weight(0, 1) == 0.0);
  CHECK(g[0].bias(0) == 1.0);
}

TEST_CASE("backward refuses a stale cache") {
  Architecture arch;
  arch.covariate_width = 2;
  Network net = random_network(arch, 1);
  const std::vector<double> x{0.1, 0.2};
  auto fr = forward(net, x, 1.0);
  net.mutable_parameters()[0].bias(0) += 1.0;
  CHECK_THROWS_AS(backward(net, fr.cache, 1.0), ContractViolation);
}

TEST_CASE("backprop matches central differences on 20 random networks") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Architecture arch;
    arch.covariate_width = 2 + seed % 3;
    arch.hidden_widths = {5, 4, 3};
    arch.concat_to_all_layers = seed % 2 == 1;
    const Network net = random_network(arch, 100 + seed);
    const Batch b = random_batch(arch.covariate_width, 8, 200 + seed);
    CHECK(gradient_check(net, b) <= 1e-4);
  }
}

TEST_CASE("gradient_check on an exactly linear network") {
  Architecture arch;
  arch.covariate_width = 3;
  arch.hidden_widths = {};
  const Network net = random_network(arch, 5);
  CHECK(gradient_check(net, random_batch(3, 10, 6)) <= 1e-7);
}

TEST_CASE("gradient_check on a 64-parameter swish network") {
  Architecture arch;
  arch.covariate_width = 4;
  arch.hidden_widths = {3, 9};
  const Network net = random_network(arch, 8);
  REQUIRE(net.parameter_count() == 64);
  CHECK(gradient_check(net, random_batch(4, 16, 9)) <= 1e-4);
}

TEST_CASE("gradient_check covers frozen parameters") {
  // Frozen parameters still have defined gradients; a deliberately wrong
  // analytic gradient in the frozen first layer would show up here.
  Architecture arch;
  arch.covariate_width = 2;
  arch.hidden_widths = {4};
  Network net = random_network(arch, 4);
  const Batch b = random_batch(2, 6, 4);
  const auto g = loss_gradients(net, b);
  CHECK(g[0].weight.cwiseAbs().maxCoeff() > 0.0);
  CHECK(gradient_check(net, b) <= 1e-4);
}

TEST_CASE("mse_loss") {
  {
    const auto r = mse_loss(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1));
    CHECK(r.loss == 0.0);
    CHECK(r.gradient.isZero(0.0));
  }
  {
    Eigen::VectorXd p(1), y(1);
    p << 2;
    y << 0;
    const auto r = mse_loss(p, y);
    CHECK(r.loss == 4.0);
    CHECK(r.gradient(0) == 4.0);
  }
  CHECK(mse_loss(Eigen::Vector2d(1, 3), Eigen::Vector2d(0, 0)).loss == 5.0);
  CHECK_THROWS_AS(mse_loss(Eigen::VectorXd(), Eigen::VectorXd()), EmptyBatchError);
  CHECK_THROWS_AS(mse_loss(Eigen::Vector2d(1, 1), Eigen::Vector3d(1, 1, 1)), InputShapeError);
}

TEST_CASE("step: plain SGD arithmetic") {
  Architecture arch;
  arch.covariate_width = 1;
  arch.hidden_widths = {};
  Network net(arch);
  net.mutable_parameters()[0].weight(0, 0) = 0.5;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd_momentum;
  cfg.momentum = 0.0;
  cfg.learning_rate = 0.1;
  OptimizerState opt(cfg, net);
  auto g = zeros_like(net);
  g[0].weight(0, 0) = 1.0;
  step(net, g, FreezeMask::none(net), opt);
  CHECK(net.parameters()[0].weight(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("step: adaptive moment first step has magnitude lr") {
  for (double g0 : {1e-3, 1.0, 1e3, -50.0}) {
    Architecture arch;
    arch.covariate_width = 1;
    arch.hidden_widths = {};
    Network net(arch);
    OptimizerConfig cfg;
    cfg.learning_rate = 1e-3;
    OptimizerState opt(cfg, net);
    auto g = zeros_like(net);
    g[0].weight(0, 0) = g0;
    step(net, g, FreezeMask::none(net), opt);
    // m_hat = g, v_hat = g^2 at step one, so the update is lr * g / (|g| + eps).
    const double expected = -1e-3 * g0 / (std::abs(g0) + cfg.epsilon);
    CHECK(net.parameters()[0].weight(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(net.parameters()[0].weight(0, 0)) == doctest::Approx(1e-3).epsilon(1e-4));
  }
}

TEST_CASE("step: fully frozen mask leaves parameters and accumulators untouched") {
  Architecture arch;
  arch.covariate_width = 3;
  arch.hidden_widths = {4};
  Network net = random_network(arch, 2);
  const auto before = net.parameters();
  OptimizerState opt(OptimizerConfig{}, net);
  const Batch b = random_batch(3, 5, 3);
  for (int i = 0; i < 10; ++i) step(net, loss_gradients(net, b), FreezeMask::all(net), opt);
  CHECK(bitwise_equal(before, net.parameters()));
  for (const auto& m : opt.first_moment) CHECK(m.weight.isZero(0.0));
  for (const auto& v : opt.second_moment) CHECK(v.weight.isZero(0.0));
}

TEST_CASE("step: non-finite gradient reports the epoch") {
  Architecture arch;
  arch.covariate_width = 1;
  Network net(arch);
  OptimizerState opt(OptimizerConfig{}, net);
  opt.epoch = 17;
  auto g = zeros_like(net);
  g[1].bias(0) = std::nan("");
  try {
    step(net, g, FreezeMask::none(net), opt);
    FAIL("expected TrainingDivergence");
  } catch (const TrainingDivergence& e) {
    CHECK(e.epoch() == 17);
  }
}

TEST_CASE("property: frozen parameters are bitwise unchanged by training") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Architecture arch;
    arch.covariate_width = 3;
    arch.hidden_widths = {6, 5};
    arch.concat_to_all_layers = seed % 2 == 0;
    Network net = random_network(arch, seed);
    FreezeMask mask = FreezeMask::none(net);
    std::mt19937_64 rng(seed + 1000);
    std::bernoulli_distribution coin(0.4);
    for (auto& lm : mask.layers()) {
      lm.weight = lm.weight.unaryExpr([&](bool) { return coin(rng); });
      lm.bias = lm.bias.unaryExpr([&](bool) { return coin(rng); });
    }
    const auto before = net.parameters();
    TrainingConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 7;
    cfg.optimizer.kind = seed % 3 == 0 ? OptimizerKind::sgd_momentum
                                       : OptimizerKind::adaptive_moment;
    cfg.optimizer.learning_rate = 1e-2;
    train(net, mask, random_batch(3, 40, seed), random_batch(3, 10, seed + 7), cfg, rng);
    bool changed_some = false;
    for (std::size_t l = 0; l < before.size(); ++l) {
      const auto& lm = mask.layers()[l];
      for (Eigen::Index i = 0; i < lm.weight.size(); ++i) {
        const double a = before[l].weight.data()[i];
        const double b = net.parameters()[l].weight.data()[i];
        if (lm.weight.data()[i]) CHECK(std::memcmp(&a, &b, sizeof a) == 0);
        else changed_some |= a != b;
      }
      for (Eigen::Index i = 0; i < lm.bias.size(); ++i) {
        const double a = before[l].bias(i);
        const double b = net.parameters()[l].bias(i);
        if (lm.bias(i)) CHECK(std::memcmp(&a, &b, sizeof a) == 0);
      }
    }
    CHECK(changed_some);
  }
}

TEST_CASE("zeroed treatment edges make forward invariant to t") {
  Architecture arch;
  arch.covariate_width = 4;
  arch.hidden_widths = {8, 8};
  Network net = random_network(arch, 11);
  net.mutable_parameters()[0].weight.col(*net.treatment_column(0)).setZero();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x{normal(rng), normal(rng), normal(rng), normal(rng)};
    const double a = predict(net, x, 0.0);
    const double b = predict(net, x, 1.0);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  }
}

TEST_CASE("training is deterministic given the seed") {
  Architecture arch;
  arch.covariate_width = 2;
  arch.hidden_widths = {8};
  TrainingConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  auto run = [&] {
    Network net = random_network(arch, 9);
    std::mt19937_64 rng(77);
    train(net, FreezeMask::none(net), random_batch(2, 50, 1), random_batch(2, 20, 2), cfg, rng);
    return net.parameters();
  };
  CHECK(bitwise_equal(run(), run()));
}

TEST_CASE("training fits a noiseless linear target") {
  Architecture arch;
  arch.covariate_width = 2;
  arch.hidden_widths = {};
  Network net(arch);
  Batch b = random_batch(2, 200, 4);
  for (Eigen::Index j = 0; j < b.size(); ++j) b.y(j) = 2.0 * b.x(0, j) - b.x(1, j);
  TrainingConfig cfg;
  cfg.epochs = 400;
  cfg.batch_size = 20;
  cfg.optimizer.learning_rate = 1e-2;
  std::mt19937_64 rng(1);
  const auto log = train(net, FreezeMask::none(net), b, Batch{}, cfg, rng);
  CHECK(log.train_mse.back() < 1e-6);
}
