#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "tsbreak/autoencoder.hpp"
#include "tsbreak/rng.hpp"

using namespace tsbreak;

namespace {

// Independent re-implementation of the forward pass and objective, used as
// the oracle for encode/decode/objective/gradient checks. Kept deliberately
// naive: explicit double loops, no sharing with the library code paths.
double oracle_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> oracle_encode(const LayerParams& p,
                                  const std::vector<double>& s) {
  std::vector<double> f(p.d_f);
  for (std::size_t i = 0; i < p.d_f; ++i) {
    double z = p.b_e[i];
    for (std::size_t j = 0; j < p.d_s; ++j) z += p.W[i * p.d_s + j] * s[j];
    f[i] = p.activation == Activation::kSigmoid ? oracle_sigmoid(z)
                                                : std::tanh(z);
  }
  return f;
}

std::vector<double> oracle_decode(const LayerParams& p,
                                  const std::vector<double>& f) {
  std::vector<double> v(p.d_s);
  for (std::size_t j = 0; j < p.d_s; ++j) {
    double z = p.b_d[j];
    for (std::size_t i = 0; i < p.d_f; ++i) z += p.W[i * p.d_s + j] * f[i];
    v[j] = p.activation == Activation::kSigmoid ? oracle_sigmoid(z)
                                                : std::tanh(z);
  }
  return v;
}

double oracle_objective(const LayerParams& p,
                        const std::vector<std::vector<double>>& data,
                        const TrainConfig& cfg) {
  double acc = 0.0;
  for (const auto& s : data) {
    const auto v = oracle_decode(p, oracle_encode(p, s));
    if (cfg.loss == LossKind::kSquare) {
      for (std::size_t j = 0; j < s.size(); ++j)
        acc += (s[j] - v[j]) * (s[j] - v[j]);
    } else {
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double vc = std::clamp(v[j], 1e-12, 1.0 - 1e-12);
        acc -= s[j] * std::log(vc) + (1.0 - s[j]) * std::log(1.0 - vc);
      }
    }
  }
  double decay = 0.0;
  for (const double w : p.W) decay += w * w;
  return acc + cfg.weight_decay * decay;
}

LayerParams random_layer(Rng& rng, std::size_t d_f, std::size_t d_s,
                         Activation act = Activation::kSigmoid,
                         double scale = 0.8) {
  LayerParams p;
  p.d_f = d_f;
  p.d_s = d_s;
  p.activation = act;
  p.W.resize(d_f * d_s);
  p.b_e.resize(d_f);
  p.b_d.resize(d_s);
  for (auto& w : p.W) w = rng.uniform(-scale, scale);
  for (auto& b : p.b_e) b = rng.uniform(-scale, scale);
  for (auto& b : p.b_d) b = rng.uniform(-scale, scale);
  return p;
}

std::vector<std::vector<double>> random_batch(Rng& rng, std::size_t n,
                                              std::size_t d) {
  std::vector<std::vector<double>> batch(n, std::vector<double>(d));
  for (auto& s : batch)
    for (auto& x : s) x = rng.uniform01();
  return batch;
}

/// Central finite differences of the batch objective with respect to every
/// parameter, compared against the analytic gradient. Returns the maximum
/// relative error with denominators max(1, |a|, |fd|).
double max_gradient_error(LayerParams layer,
                          const std::vector<std::vector<double>>& batch,
                          const TrainConfig& cfg, double eps = 1e-4) {
  const LayerGradients g = gradients(layer, batch, cfg);
  double worst = 0.0;
  const auto check_param = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + eps;
    const double plus = objective(layer, batch, cfg);
    param = saved - eps;
    const double minus = objective(layer, batch, cfg);
    param = saved;
    const double fd = (plus - minus) / (2.0 * eps);
    const double denom = std::max({1.0, std::abs(analytic), std::abs(fd)});
    worst = std::max(worst, std::abs(analytic - fd) / denom);
  };
  for (std::size_t k = 0; k < layer.W.size(); ++k)
    check_param(layer.W[k], g.dW[k]);
  for (std::size_t i = 0; i < layer.d_f; ++i)
    check_param(layer.b_e[i], g.db_e[i]);
  for (std::size_t j = 0; j < layer.d_s; ++j)
    check_param(layer.b_d[j], g.db_d[j]);
  return worst;
}

}  // namespace

TEST_CASE("activation values") {
  CHECK(activate({0.0}, Activation::kSigmoid)[0] == 0.5);
  CHECK(activate({0.0}, Activation::kTanh)[0] == 0.0);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-20, 20);
    const double s = activate({x}, Activation::kSigmoid)[0];
    const double sm = activate({-x}, Activation::kSigmoid)[0];
    CHECK(sm == doctest::Approx(1.0 - s).epsilon(1e-12));
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("encode zero weights gives all-0.5") {
  LayerParams p;
  p.d_f = 3;
  p.d_s = 4;
  p.W.assign(12, 0.0);
  p.b_e.assign(3, 0.0);
  p.b_d.assign(4, 0.0);
  const auto f = encode(p, {0.1, 0.9, 0.4, 0.2});
  for (const double x : f) CHECK(x == 0.5);

  LayerParams unit;
  unit.d_f = 1;
  unit.d_s = 1;
  unit.W = {1.0};
  unit.b_e = {0.0};
  unit.b_d = {0.0};
  CHECK(encode(unit, {0.0})[0] == 0.5);
}

TEST_CASE("decode zero weights gives all-0.5") {
  LayerParams p;
  p.d_f = 3;
  p.d_s = 4;
  p.W.assign(12, 0.0);
  p.b_e.assign(3, 0.0);
  p.b_d.assign(4, 0.0);
  const auto v = decode(p, {0.2, 0.5, 0.9});
  REQUIRE(v.size() == 4);
  for (const double x : v) CHECK(x == 0.5);
}

TEST_CASE("encode/decode match the naive oracle") {
  Rng rng(99);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t d_s = 1 + rng.uniform_index(6);
    const std::size_t d_f = 1 + rng.uniform_index(6);
    const auto act = iter % 2 == 0 ? Activation::kSigmoid : Activation::kTanh;
    const LayerParams p = random_layer(rng, d_f, d_s, act);
    std::vector<double> s(d_s);
    for (auto& x : s) x = rng.uniform(-2, 2);
    const auto f = encode(p, s);
    const auto f_oracle = oracle_encode(p, s);
    for (std::size_t i = 0; i < d_f; ++i)
      CHECK(f[i] == doctest::Approx(f_oracle[i]).epsilon(1e-14));
    const auto v = decode(p, f);
    const auto v_oracle = oracle_decode(p, f_oracle);
    for (std::size_t j = 0; j < d_s; ++j)
      CHECK(v[j] == doctest::Approx(v_oracle[j]).epsilon(1e-14));
  }
}

TEST_CASE("encode/decode reject dimension mismatch") {
  Rng rng(1);
  const LayerParams p = random_layer(rng, 2, 3);
  CHECK_THROWS_AS(encode(p, {1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(decode(p, {1.0, 2.0, 3.0}), ConfigError);
}

TEST_CASE("loss values") {
  CHECK(loss({0.3, 0.7}, {0.3, 0.7}, LossKind::kSquare) == 0.0);
  CHECK(loss({1, 0}, {0, 0}, LossKind::kSquare) == 1.0);
  CHECK(loss({0.5}, {0.5}, LossKind::kCrossEntropy) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(loss({1.0}, {1.0, 2.0}, LossKind::kSquare), ConfigError);
  // clamp keeps saturated decodes finite
  CHECK(std::isfinite(loss({1.0}, {0.0}, LossKind::kCrossEntropy)));
}

TEST_CASE("objective matches the independent oracle") {
  Rng rng(17);
  TrainConfig cfg;
  SUBCASE("zero reconstruction error, zero decay") {
    // with W = 0 and b zero the reconstruction of 0.5-vectors is exact
    LayerParams p;
    p.d_f = 2;
    p.d_s = 2;
    p.W.assign(4, 0.0);
    p.b_e.assign(2, 0.0);
    p.b_d.assign(2, 0.0);
    cfg.weight_decay = 0.0;
    CHECK(objective(p, {{0.5, 0.5}}, cfg) == 0.0);
  }
  SUBCASE("decay term alone") {
    LayerParams p;
    p.d_f = 2;
    p.d_s = 2;
    p.W.assign(4, 1.0);
    p.b_e.assign(2, 0.0);
    p.b_d.assign(2, 0.0);
    cfg.weight_decay = 1.0;
    const double with_decay = objective(p, {}, cfg);
    CHECK(with_decay == 4.0);
  }
  SUBCASE("random instances, both losses") {
    for (int iter = 0; iter < 40; ++iter) {
      const std::size_t d_s = 1 + rng.uniform_index(5);
      const std::size_t d_f = 1 + rng.uniform_index(5);
      const LayerParams p = random_layer(rng, d_f, d_s);
      const auto batch = random_batch(rng, 1 + rng.uniform_index(6), d_s);
      cfg.weight_decay = rng.uniform01() < 0.5 ? 0.0 : 0.01;
      cfg.loss = iter % 2 == 0 ? LossKind::kSquare : LossKind::kCrossEntropy;
      CHECK(objective(p, batch, cfg) ==
            doctest::Approx(oracle_objective(p, batch, cfg)).epsilon(1e-12));
    }
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(2024);
  TrainConfig cfg;
  cfg.weight_decay = 1e-3;
  SUBCASE("6->3 sigmoid layer, 5 samples") {
    const LayerParams p = random_layer(rng, 3, 6);
    const auto batch = random_batch(rng, 5, 6);
    cfg.loss = LossKind::kSquare;
    CHECK(max_gradient_error(p, batch, cfg) < 1e-5);
    cfg.loss = LossKind::kCrossEntropy;
    CHECK(max_gradient_error(p, batch, cfg) < 1e-5);
  }
  SUBCASE("tanh activation") {
    const LayerParams p = random_layer(rng, 2, 4, Activation::kTanh);
    const auto batch = random_batch(rng, 3, 4);
    cfg.loss = LossKind::kSquare;
    CHECK(max_gradient_error(p, batch, cfg) < 1e-5);
  }
}

TEST_CASE("weight-decay gradient isolation: grad(lambda=1) - grad(lambda=0) = 2W") {
  Rng rng(31);
  const LayerParams p = random_layer(rng, 3, 4);
  const auto batch = random_batch(rng, 4, 4);
  TrainConfig with;
  with.weight_decay = 1.0;
  TrainConfig without;
  without.weight_decay = 0.0;
  const LayerGradients g1 = gradients(p, batch, with);
  const LayerGradients g0 = gradients(p, batch, without);
  for (std::size_t k = 0; k < p.W.size(); ++k)
    CHECK(g1.dW[k] - g0.dW[k] == doctest::Approx(2.0 * p.W[k]).epsilon(1e-10));
  for (std::size_t i = 0; i < p.d_f; ++i) CHECK(g1.db_e[i] == g0.db_e[i]);
}

TEST_CASE("gradient is near zero at a converged 1-D problem") {
  // single sample, d_f = d_s = 1: train long enough to sit near a minimum
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.learning_rate = 0.5;
  cfg.weight_decay = 0.0;
  cfg.seed = 3;
  const std::vector<std::vector<double>> data{{0.73}};
  const LayerParams p = train_layer(data, 1, cfg);
  const LayerGradients g = gradients(p, data, cfg);
  CHECK(std::abs(g.dW[0]) < 1e-4);
  CHECK(std::abs(g.db_e[0]) < 1e-4);
  CHECK(std::abs(g.db_d[0]) < 1e-4);
}

TEST_CASE("train_layer is deterministic and improves the objective") {
  Rng rng(8);
  const auto data = random_batch(rng, 20, 6);
  TrainConfig cfg;
  cfg.seed = 77;
  std::vector<double> hist1, hist2;
  const LayerParams a = train_layer(data, 3, cfg, &hist1);
  const LayerParams b = train_layer(data, 3, cfg, &hist2);
  CHECK(a.W == b.W);
  CHECK(a.b_e == b.b_e);
  CHECK(a.b_d == b.b_d);
  CHECK(hist1 == hist2);
  REQUIRE(hist1.size() == cfg.epochs + 1);
  CHECK(hist1.back() < hist1.front());
}

TEST_CASE("overcomplete layer drives reconstruction below 10% of initial") {
  Rng rng(15);
  const auto data = random_batch(rng, 5, 4);
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.epochs = 2000;
  cfg.weight_decay = 0.0;
  std::vector<double> hist;
  train_layer(data, 4, cfg, &hist);
  CHECK(hist.back() < 0.1 * hist.front());
}

TEST_CASE("train_stack chains dimensions and matches depth-1 train_layer") {
  Rng rng(21);
  const auto data = random_batch(rng, 12, 8);
  StackConfig sc;
  sc.layer_feature_dims = {4, 2};
  sc.train.seed = 9;
  sc.train.epochs = 10;
  const AutoencoderStack stack = train_stack(data, sc);
  REQUIRE(stack.layers.size() == 2);
  CHECK(stack.layers[0].d_s == 8);
  CHECK(stack.layers[0].d_f == 4);
  CHECK(stack.layers[1].d_s == 4);
  CHECK(stack.layers[1].d_f == 2);
  CHECK(stack.loss_history.size() == 2);

  StackConfig one;
  one.layer_feature_dims = {4};
  one.train.seed = 9;
  one.train.epochs = 10;
  const AutoencoderStack s1 = train_stack(data, one);
  TrainConfig layer_cfg = one.train;
  layer_cfg.seed = stream_seed(one.train.seed, 0);
  const LayerParams direct = train_layer(data, 4, layer_cfg);
  CHECK(s1.layers[0].W == direct.W);
  CHECK(s1.layers[0].b_e == direct.b_e);
  CHECK(s1.layers[0].b_d == direct.b_d);
}

TEST_CASE("encode_stack composes per-layer encodes") {
  Rng rng(33);
  AutoencoderStack stack;
  stack.layers.push_back(random_layer(rng, 5, 7));
  stack.layers.push_back(random_layer(rng, 2, 5));
  std::vector<double> s(7);
  for (auto& x : s) x = rng.uniform01();
  const auto top = encode_stack(stack, s);
  const auto manual = encode(stack.layers[1], encode(stack.layers[0], s));
  REQUIRE(top.size() == 2);
  CHECK(top == manual);

  AutoencoderStack one;
  one.layers = {stack.layers[0]};
  CHECK(encode_stack(one, s) == encode(stack.layers[0], s));

  AutoencoderStack zero;
  LayerParams z;
  z.d_f = 3;
  z.d_s = 3;
  z.W.assign(9, 0.0);
  z.b_e.assign(3, 0.0);
  z.b_d.assign(3, 0.0);
  zero.layers = {z, z};
  for (const double x : encode_stack(zero, {0.2, 0.4, 0.9}))
    CHECK(x == 0.5);
}

TEST_CASE("default layer dims follow the 0.1 codebook ratio") {
  CHECK(default_layer_dims(50, 2) == std::vector<std::size_t>{5, 1});
  CHECK(default_layer_dims(400, 2) == std::vector<std::size_t>{40, 4});
  CHECK(default_layer_dims(3, 2) == std::vector<std::size_t>{1, 1});
}

TEST_CASE("model save/load round-trips bit-exactly") {
  Rng rng(62);
  const auto data = random_batch(rng, 10, 6);
  StackConfig sc;
  sc.layer_feature_dims = {3, 2};
  sc.train.seed = 1234;
  sc.train.epochs = 5;
  const AutoencoderStack stack = train_stack(data, sc);

  testutil::TempDir tmp("model");
  save_stack(stack, tmp.file("m.tsae"));
  const AutoencoderStack back = load_stack(tmp.file("m.tsae"));
  REQUIRE(back.layers.size() == stack.layers.size());
  for (std::size_t k = 0; k < stack.layers.size(); ++k) {
    CHECK(back.layers[k].W == stack.layers[k].W);
    CHECK(back.layers[k].b_e == stack.layers[k].b_e);
    CHECK(back.layers[k].b_d == stack.layers[k].b_d);
    CHECK(back.layers[k].activation == stack.layers[k].activation);
    CHECK(back.loss_history[k] == stack.loss_history[k]);
  }
  CHECK(back.config.layer_feature_dims == stack.config.layer_feature_dims);
  CHECK(back.config.train.seed == stack.config.train.seed);

  CHECK_THROWS_AS(load_stack(tmp.file("missing.tsae")), ParseError);
  testutil::write_file(tmp.file("junk.tsae"), "not a model");
  CHECK_THROWS_AS(load_stack(tmp.file("junk.tsae")), ParseError);
}

TEST_CASE("training diverges with an absurd learning rate") {
  Rng rng(44);
  const auto data = random_batch(rng, 8, 4);
  TrainConfig cfg;
  cfg.learning_rate = 1e6;
  cfg.seed = 5;
  cfg.epochs = 50;
  CHECK_THROWS_AS(train_layer(data, 4, cfg), TrainingDivergedError);
}
