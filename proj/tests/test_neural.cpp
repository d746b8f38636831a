#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "biotac/neural.hpp"
#include "biotac/rng.hpp"

using namespace biotac;

namespace {

NetSpec tiny_ffn(int combo = 3, int output_dim = 4) {
  NetSpec spec;
  spec.kind = NetSpec::Kind::kFeedForward;
  spec.window.combo = combo;
  spec.output_dim = output_dim;
  spec.widths = {8, 6};
  spec.activations = {Act::kTanh, Act::kRelu};
  return spec;
}

NetSpec tiny_network_b(int output_dim = 4) {
  NetSpec spec;
  spec.kind = NetSpec::Kind::kNetworkB;
  spec.window.combo = 1;
  spec.window.include_temperature = true;
  spec.output_dim = output_dim;
  spec.position_widths = {6};
  spec.force_widths = {8};
  spec.temperature_widths = {4};
  spec.trunk_widths = {10};
  return spec;
}

NetSpec tiny_transformer(int output_dim = 4) {
  NetSpec spec;
  spec.kind = NetSpec::Kind::kTransformer;
  spec.window.combo = 1;
  spec.output_dim = output_dim;
  spec.n_layers = 2;
  spec.n_heads = 2;
  spec.embed_dim = 8;
  spec.hidden_dim = 12;
  return spec;
}

Mat random_batch(int rows, int cols, Rng& rng) {
  Mat m(rows, cols);
  for (double& v : m.a) v = rng.normal();
  return m;
}

// Finite-difference oracle over every model parameter.
double max_fd_error(const NetSpec& spec, std::uint64_t seed) {
  NeuralModel model = init_model(spec, seed);
  Rng rng(seed ^ 0xabcdef);
  Mat x = random_batch(3, spec.input_dim(), rng);
  Mat target(3, spec.output_dim);
  for (std::size_t i = 0; i < target.size(); ++i)
    target.a[i] = 2.0 + 0.05 * static_cast<double>(i);

  Tape tape;
  std::vector<int> param_nodes;
  int out = forward_graph(tape, model, x, false, nullptr, &param_nodes);
  int loss = tape.loss_eq1(out, target);
  tape.backward(loss);

  auto eval = [&](const NeuralModel& m) {
    Tape t;
    int o = forward_graph(t, m, x, false, nullptr, nullptr);
    return t.val(t.loss_eq1(o, target)).a[0];
  };

  double h = 1e-5, worst = 0.0;
  for (std::size_t p = 0; p < model.params.size(); ++p) {
    const Mat& g = tape.grad(param_nodes[p]);
    for (std::size_t i = 0; i < model.params[p].size(); ++i) {
      NeuralModel plus = model, minus = model;
      plus.params[p].a[i] += h;
      minus.params[p].a[i] -= h;
      double fd = (eval(plus) - eval(minus)) / (2.0 * h);
      double denom = std::max({1.0, std::abs(fd), std::abs(g.a[i])});
      worst = std::max(worst, std::abs(fd - g.a[i]) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("spec validation") {
  NetSpec bad = tiny_ffn();
  bad.activations.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = tiny_transformer();
  bad.embed_dim = 9;  // not divisible by 2 heads
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = tiny_transformer();
  bad.dropout_rate = 0.7;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("init is seeded and deterministic") {
  NetSpec spec = tiny_ffn();
  NeuralModel a = init_model(spec, 42);
  NeuralModel b = init_model(spec, 42);
  NeuralModel c = init_model(spec, 43);
  REQUIRE(a.params.size() == b.params.size());
  bool differs = false;
  for (std::size_t p = 0; p < a.params.size(); ++p) {
    CHECK(a.params[p].a == b.params[p].a);
    if (a.params[p].a != c.params[p].a) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("param and flops arithmetic for a single dense layer") {
  NetSpec spec;
  spec.kind = NetSpec::Kind::kFeedForward;
  spec.window.combo = 1;  // input 12
  spec.output_dim = 21;
  CHECK(param_count(spec) == 273);  // 12*21 + 21
  CHECK(flops_count(spec) == 525);  // 2*12*21 + 21

  // Stacking adds counts.
  NetSpec deep = spec;
  deep.widths = {10};
  deep.activations = {Act::kRelu};
  CHECK(param_count(deep) == (12 * 10 + 10) + (10 * 21 + 21));
  CHECK(flops_count(deep) == (2 * 12 * 10 + 10) + (2 * 10 * 21 + 21));

  NeuralModel model = init_model(deep, 1);
  CHECK(model.param_count() == param_count(deep));
}

TEST_CASE("default network_b lands within 5% of 806K parameters") {
  NetSpec spec;
  spec.kind = NetSpec::Kind::kNetworkB;
  spec.window.combo = 1;
  spec.window.include_temperature = true;  // input vector of length 13
  spec.output_dim = 23;
  std::int64_t n = param_count(spec);
  CHECK(n > 806000 * 0.95);
  CHECK(n < 806000 * 1.05);
}

TEST_CASE("all-zero feed-forward with relu outputs zero") {
  NetSpec spec = tiny_ffn();
  spec.activations = {Act::kRelu, Act::kRelu};
  NeuralModel model = init_model(spec, 1);
  for (Mat& p : model.params) std::fill(p.a.begin(), p.a.end(), 0.0);
  Rng rng(2);
  std::vector<double> x(static_cast<std::size_t>(spec.input_dim()));
  for (double& v : x) v = rng.normal();
  for (double v : forward(model, x)) CHECK(v == 0.0);
}

TEST_CASE("eval-mode forward is deterministic") {
  for (const NetSpec& spec :
       {tiny_ffn(), tiny_network_b(), tiny_transformer()}) {
    NeuralModel model = init_model(spec, 7);
    Rng rng(3);
    std::vector<double> x(static_cast<std::size_t>(spec.input_dim()));
    for (double& v : x) v = rng.normal();
    std::vector<double> a = forward(model, x);
    std::vector<double> b = forward(model, x);
    REQUIRE(a.size() == static_cast<std::size_t>(spec.output_dim));
    CHECK(a == b);
  }
}

TEST_CASE("gradients match finite differences on every architecture") {
  CHECK(max_fd_error(tiny_ffn(), 11) < 1e-4);
  CHECK(max_fd_error(tiny_network_b(), 12) < 1e-4);
  CHECK(max_fd_error(tiny_transformer(), 13) < 1e-4);
}

TEST_CASE("feed-forward gradient check across all activations") {
  NetSpec spec = tiny_ffn();
  spec.widths = {6, 6, 6, 6, 6, 6};
  spec.activations = {Act::kSigmoid, Act::kRelu,      Act::kHardtanh,
                      Act::kTanh,    Act::kLeakyRelu, Act::kElu};
  spec.leaky_slope = 0.2;
  CHECK(max_fd_error(spec, 21) < 1e-4);
}

TEST_CASE("adam basics") {
  std::vector<Mat> params(1, Mat(1, 2));
  params[0].a = {1.0, -2.0};
  std::vector<Mat> grads(1, Mat(1, 2));
  AdamState state;

  adam_step(params, grads, state, 0.1);  // zero gradient
  CHECK(params[0].a[0] == 1.0);
  CHECK(params[0].a[1] == -2.0);

  state = AdamState{};
  grads[0].a = {0.003, -7.0};
  adam_step(params, grads, state, 0.1);
  // First bias-corrected step moves by ~ -lr * sign(g).
  CHECK(params[0].a[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-3));
  CHECK(params[0].a[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-3));
}

TEST_CASE("adam descends a quadratic") {
  std::vector<Mat> params(1, Mat(1, 1));
  std::vector<Mat> grads(1, Mat(1, 1));
  AdamState state;
  for (int i = 0; i < 200; ++i) {
    grads[0].a[0] = 2.0 * (params[0].a[0] - 3.0);  // d/dp (p-3)^2
    adam_step(params, grads, state, 0.1);
  }
  CHECK(std::abs(params[0].a[0] - 3.0) < 0.05);
}

namespace {

struct LinearProblem {
  std::vector<std::vector<double>> x_train, y_train, x_val, y_val;
};

LinearProblem linear_problem(int input_dim, int output_dim, int n,
                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> w(
      static_cast<std::size_t>(output_dim),
      std::vector<double>(static_cast<std::size_t>(input_dim)));
  for (auto& row : w)
    for (double& v : row) v = rng.normal(0, 0.5);
  LinearProblem prob;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(static_cast<std::size_t>(input_dim));
    for (double& v : x) v = rng.normal();
    std::vector<double> y(static_cast<std::size_t>(output_dim), 0.0);
    for (int o = 0; o < output_dim; ++o)
      for (int j = 0; j < input_dim; ++j)
        y[static_cast<std::size_t>(o)] +=
            w[static_cast<std::size_t>(o)][static_cast<std::size_t>(j)] *
            x[static_cast<std::size_t>(j)];
    if (i % 10 == 0) {
      prob.x_val.push_back(x);
      prob.y_val.push_back(y);
    } else {
      prob.x_train.push_back(x);
      prob.y_train.push_back(y);
    }
  }
  return prob;
}

double val_mae(const NeuralModel& m, const LinearProblem& prob) {
  double s = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < prob.x_val.size(); ++i) {
    std::vector<double> p = forward(m, prob.x_val[i]);
    for (std::size_t c = 0; c < p.size(); ++c) {
      s += std::abs(p[c] - prob.y_val[i][c]);
      ++cnt;
    }
  }
  return s / static_cast<double>(cnt);
}

}  // namespace

TEST_CASE("training fits a realizable linear target") {
  NetSpec spec = tiny_ffn(3, 3);  // input 6, output 3
  spec.widths = {32};
  spec.activations = {Act::kTanh};
  LinearProblem prob = linear_problem(6, 3, 2000, 5);
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.lr = 3e-3;
  cfg.max_epochs = 150;
  cfg.patience = 150;
  cfg.seed = 9;
  NeuralModel m = train(spec, prob.x_train, prob.y_train, prob.x_val,
                        prob.y_val, cfg);
  CHECK(val_mae(m, prob) < 0.02);
  CHECK(m.train_curve.size() == m.val_curve.size());
}

TEST_CASE("patience zero trains exactly one epoch") {
  NetSpec spec = tiny_ffn(3, 2);
  LinearProblem prob = linear_problem(6, 2, 300, 6);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 0;
  cfg.seed = 1;
  NeuralModel m = train(spec, prob.x_train, prob.y_train, prob.x_val,
                        prob.y_val, cfg);
  CHECK(m.train_curve.size() == 1);
  CHECK(m.val_curve.size() == 1);
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
  NetSpec spec = tiny_ffn(3, 2);
  LinearProblem prob = linear_problem(6, 2, 400, 7);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  cfg.seed = 77;
  NeuralModel a = train(spec, prob.x_train, prob.y_train, prob.x_val,
                        prob.y_val, cfg);
  NeuralModel b = train(spec, prob.x_train, prob.y_train, prob.x_val,
                        prob.y_val, cfg);
  REQUIRE(a.params.size() == b.params.size());
  for (std::size_t p = 0; p < a.params.size(); ++p)
    CHECK(a.params[p].a == b.params[p].a);
  CHECK(a.val_curve == b.val_curve);
}

TEST_CASE("early stopping returns the best-validation parameters") {
  NetSpec spec = tiny_ffn(3, 2);
  spec.widths = {16};
  spec.activations = {Act::kTanh};
  LinearProblem prob = linear_problem(6, 2, 500, 8);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.patience = 4;
  cfg.lr = 5e-3;
  cfg.seed = 3;
  NeuralModel m = train(spec, prob.x_train, prob.y_train, prob.x_val,
                        prob.y_val, cfg);
  double best = *std::min_element(m.val_curve.begin(), m.val_curve.end());
  // Re-evaluating the returned parameters reproduces the recorded best.
  double s = 0.0;
  for (std::size_t i = 0; i < prob.x_val.size(); ++i) {
    std::vector<double> p = forward(m, prob.x_val[i]);
    Mat pm(1, static_cast<int>(p.size())), ym(1, static_cast<int>(p.size()));
    pm.a = p;
    ym.a = prob.y_val[i];
    s += loss_eq1_value(ym, pm);
  }
  s /= static_cast<double>(prob.x_val.size());
  CHECK(s == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("divergence raises TrainingDiverged") {
  NetSpec spec = tiny_ffn(3, 2);
  LinearProblem prob = linear_problem(6, 2, 200, 9);
  // Huge targets overflow the squared term of the loss immediately.
  for (auto& y : prob.y_train)
    for (double& v : y) v *= 1e200;
  for (auto& y : prob.y_val)
    for (double& v : y) v *= 1e200;
  TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.patience = 10;
  cfg.lr = 1e10;
  CHECK_THROWS_AS(train(spec, prob.x_train, prob.y_train, prob.x_val,
                        prob.y_val, cfg),
                  TrainingDiverged);
}

TEST_CASE("model file round trip preserves predictions exactly") {
  for (const NetSpec& spec :
       {tiny_ffn(1, 21), tiny_network_b(21), tiny_transformer(21)}) {
    NeuralModel model = init_model(spec, 31);
    model.scaler.inputs.mean.assign(
        static_cast<std::size_t>(spec.input_dim()), 0.0);
    model.scaler.inputs.std.assign(static_cast<std::size_t>(spec.input_dim()),
                                   1.0);
    model.scaler.outputs.mean.assign(21, 0.0);
    model.scaler.outputs.std.assign(21, 1.0);
    model.train_curve = {1.0, 0.5};
    model.val_curve = {1.1, 0.6};
    std::string path = "test_neural_rt.bin";
    save_neural(model, path);
    NeuralModel back = load_neural(path);
    CHECK(back.param_count() == model.param_count());
    CHECK(back.val_curve == model.val_curve);
    Rng rng(4);
    std::vector<double> x(static_cast<std::size_t>(spec.input_dim()));
    for (double& v : x) v = rng.normal();
    std::vector<double> a = forward(model, x);
    std::vector<double> b = forward(back, x);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(std::abs(a[i] - b[i]) < 1e-12);
    std::remove(path.c_str());
  }
}

TEST_CASE("dropout only affects training mode") {
  NetSpec spec = tiny_transformer();
  spec.dropout_rate = 0.3;
  NeuralModel model = init_model(spec, 5);
  Rng rng(6);
  Mat x = random_batch(2, spec.input_dim(), rng);
  Tape t1, t2, t3;
  int e1 = forward_graph(t1, model, x, false, nullptr, nullptr);
  int e2 = forward_graph(t2, model, x, false, nullptr, nullptr);
  CHECK(t1.val(e1).a == t2.val(e2).a);
  Rng drop(7);
  int tr = forward_graph(t3, model, x, true, &drop, nullptr);
  CHECK(t3.val(tr).a != t1.val(e1).a);
}
