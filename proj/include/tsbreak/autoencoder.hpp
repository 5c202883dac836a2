#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "tsbreak/errors.hpp"
#include "tsbreak/rng.hpp"

namespace tsbreak {

enum class Activation : std::uint8_t { kSigmoid = 0, kTanh = 1 };
enum class LossKind : std::uint8_t { kSquare = 0, kCrossEntropy = 1 };

/// One tied-weight autoencoder layer. W is d_f x d_s row-major; the decoder
/// weight is always W transposed and is never stored separately.
struct LayerParams {
  std::size_t d_f = 0;
  std::size_t d_s = 0;
  std::vector<double> W;    // d_f * d_s
  std::vector<double> b_e;  // d_f
  std::vector<double> b_d;  // d_s
  Activation activation = Activation::kSigmoid;
};

struct TrainConfig {
  double learning_rate = 0.1;
  double weight_decay = 1e-4;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kSquare;
  double init_scale = 0.05;
  Activation activation = Activation::kSigmoid;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(init_scale > 0.0)) throw ConfigError("init scale must be > 0");
  }
};

struct StackConfig {
  std::vector<std::size_t> layer_feature_dims;
  TrainConfig train;

  void validate() const {
    if (layer_feature_dims.empty()) throw ConfigError("stack depth must be >= 1");
    for (const std::size_t d : layer_feature_dims)
      if (d < 1) throw ConfigError("layer feature dims must be >= 1");
    train.validate();
  }
};

/// Feature dims for a stack of the given depth using the 0.1 codebook ratio
/// per layer: d_f = max(1, round(0.1 * d_s)).
inline std::vector<std::size_t> default_layer_dims(std::size_t input_dim,
                                                   std::size_t depth) {
  std::vector<std::size_t> dims;
  std::size_t d = input_dim;
  for (std::size_t k = 0; k < depth; ++k) {
    d = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(d))));
    dims.push_back(d);
  }
  return dims;
}

struct AutoencoderStack {
  std::vector<LayerParams> layers;
  std::vector<std::vector<double>> loss_history;  // per layer, epochs+1 entries
  StackConfig config;
};

inline double activate_scalar(double x, Activation kind) {
  return kind == Activation::kSigmoid ? 1.0 / (1.0 + std::exp(-x))
                                      : std::tanh(x);
}

/// Derivative of the activation expressed through its output y.
inline double activation_deriv(double y, Activation kind) {
  return kind == Activation::kSigmoid ? y * (1.0 - y) : 1.0 - y * y;
}

inline std::vector<double> activate(const std::vector<double>& x,
                                    Activation kind) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = activate_scalar(x[i], kind);
  return out;
}

/// f = g(W s + b_e)
inline std::vector<double> encode(const LayerParams& layer,
                                  const std::vector<double>& s) {
  if (s.size() != layer.d_s)
    throw ConfigError("encode: input dim " + std::to_string(s.size()) +
                      " != layer d_s " + std::to_string(layer.d_s));
  std::vector<double> f(layer.d_f);
  for (std::size_t i = 0; i < layer.d_f; ++i) {
    double acc = layer.b_e[i];
    const double* row = layer.W.data() + i * layer.d_s;
    for (std::size_t j = 0; j < layer.d_s; ++j) acc += row[j] * s[j];
    f[i] = activate_scalar(acc, layer.activation);
  }
  return f;
}

/// v = g(W^T f + b_d)
inline std::vector<double> decode(const LayerParams& layer,
                                  const std::vector<double>& f) {
  if (f.size() != layer.d_f)
    throw ConfigError("decode: input dim " + std::to_string(f.size()) +
                      " != layer d_f " + std::to_string(layer.d_f));
  std::vector<double> v(layer.b_d);
  for (std::size_t i = 0; i < layer.d_f; ++i) {
    const double fi = f[i];
    const double* row = layer.W.data() + i * layer.d_s;
    for (std::size_t j = 0; j < layer.d_s; ++j) v[j] += row[j] * fi;
  }
  for (std::size_t j = 0; j < layer.d_s; ++j)
    v[j] = activate_scalar(v[j], layer.activation);
  return v;
}

namespace detail {
constexpr double kCeClamp = 1e-12;
inline double clamp_unit(double v) {
  return std::clamp(v, kCeClamp, 1.0 - kCeClamp);
}
}  // namespace detail

/// Reconstruction loss. Square: ||u - v||^2. Cross-entropy: the negated
/// log-likelihood -sum(u log v + (1-u) log(1-v)), with v clamped away from
/// {0,1} so saturated units stay finite.
inline double loss(const std::vector<double>& u, const std::vector<double>& v,
                   LossKind kind) {
  if (u.size() != v.size()) throw ConfigError("loss: dimension mismatch");
  double acc = 0.0;
  if (kind == LossKind::kSquare) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = u[i] - v[i];
      acc += d * d;
    }
  } else {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double vc = detail::clamp_unit(v[i]);
      acc -= u[i] * std::log(vc) + (1.0 - u[i]) * std::log(1.0 - vc);
    }
  }
  return acc;
}

/// Regularized reconstruction objective over a set of samples:
/// sum_t L(s_t, decode(encode(s_t))) + lambda * sum W_ij^2.
inline double objective(const LayerParams& layer,
                        const std::vector<std::vector<double>>& data,
                        const TrainConfig& cfg) {
  double acc = 0.0;
  for (const auto& s : data) acc += loss(s, decode(layer, encode(layer, s)), cfg.loss);
  double decay = 0.0;
  for (const double w : layer.W) decay += w * w;
  return acc + cfg.weight_decay * decay;
}

struct LayerGradients {
  std::vector<double> dW;
  std::vector<double> db_e;
  std::vector<double> db_d;
};

namespace detail {

/// Accumulates the data-term gradient of one sample into (dW, db_e, db_d).
/// The tied-weight constraint is folded in: the decoder-path gradient
/// (delta_d f^T)^T is added to dW alongside the encoder-path delta_e s^T.
inline void accumulate_sample_gradient(const LayerParams& layer,
                                       const std::vector<double>& s,
                                       LossKind loss_kind, double* dW,
                                       double* db_e, double* db_d) {
  const std::size_t d_f = layer.d_f;
  const std::size_t d_s = layer.d_s;
  const std::vector<double> f = encode(layer, s);
  const std::vector<double> v = decode(layer, f);

  // delta_d = dL/dv * g'(z_d)
  std::vector<double> delta_d(d_s);
  for (std::size_t j = 0; j < d_s; ++j) {
    double dLdv;
    if (loss_kind == LossKind::kSquare) {
      dLdv = 2.0 * (v[j] - s[j]);
    } else {
      const double vc = clamp_unit(v[j]);
      dLdv = (vc - s[j]) / (vc * (1.0 - vc));
    }
    delta_d[j] = dLdv * activation_deriv(v[j], layer.activation);
    db_d[j] += delta_d[j];
  }

  // delta_e = (W delta_d) * g'(z_e); decoder path adds f delta_d^T to dW.
  for (std::size_t i = 0; i < d_f; ++i) {
    const double* row = layer.W.data() + i * d_s;
    double* dW_row = dW + i * d_s;
    double acc = 0.0;
    for (std::size_t j = 0; j < d_s; ++j) {
      acc += row[j] * delta_d[j];
      dW_row[j] += f[i] * delta_d[j];
    }
    const double delta_e = acc * activation_deriv(f[i], layer.activation);
    db_e[i] += delta_e;
    for (std::size_t j = 0; j < d_s; ++j) dW_row[j] += delta_e * s[j];
  }
}

}  // namespace detail

/// Exact analytic gradient of `objective` restricted to `batch`, including
/// the weight-decay term once.
inline LayerGradients gradients(const LayerParams& layer,
                                const std::vector<std::vector<double>>& batch,
                                const TrainConfig& cfg) {
  LayerGradients g;
  g.dW.assign(layer.W.size(), 0.0);
  g.db_e.assign(layer.d_f, 0.0);
  g.db_d.assign(layer.d_s, 0.0);
  for (const auto& s : batch)
    detail::accumulate_sample_gradient(layer, s, cfg.loss, g.dW.data(),
                                       g.db_e.data(), g.db_d.data());
  for (std::size_t k = 0; k < layer.W.size(); ++k)
    g.dW[k] += 2.0 * cfg.weight_decay * layer.W[k];
  return g;
}

/// Trains one tied-weight layer with per-sample stochastic gradient descent.
/// Parameters start at seeded uniform(-init_scale, +init_scale); each epoch
/// visits the samples in a freshly shuffled seeded order. Deterministic
/// given (data, cfg). Returns the layer and appends the objective measured
/// before training and after every epoch to `history`.
inline LayerParams train_layer(const std::vector<std::vector<double>>& data,
                               std::size_t d_f, const TrainConfig& cfg,
                               std::vector<double>* history = nullptr) {
  cfg.validate();
  if (d_f < 1) throw ConfigError("d_f must be >= 1");
  if (data.empty()) throw ConfigError("training data is empty");
  const std::size_t d_s = data.front().size();
  for (const auto& s : data)
    if (s.size() != d_s) throw ConfigError("training vectors have mixed dims");

  LayerParams layer;
  layer.d_f = d_f;
  layer.d_s = d_s;
  layer.activation = cfg.activation;
  layer.W.resize(d_f * d_s);
  layer.b_e.resize(d_f);
  layer.b_d.resize(d_s);
  Rng init_rng(stream_seed(cfg.seed, 0));
  for (auto& w : layer.W) w = init_rng.uniform(-cfg.init_scale, cfg.init_scale);
  for (auto& b : layer.b_e) b = init_rng.uniform(-cfg.init_scale, cfg.init_scale);
  for (auto& b : layer.b_d) b = init_rng.uniform(-cfg.init_scale, cfg.init_scale);

  std::vector<double> local_history;
  std::vector<double>& hist = history != nullptr ? *history : local_history;
  hist.push_back(objective(layer, data, cfg));

  Rng shuffle_rng(stream_seed(cfg.seed, 1));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> dW(layer.W.size());
  std::vector<double> db_e(d_f);
  std::vector<double> db_d(d_s);
  const double alpha = cfg.learning_rate;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (const std::size_t idx : order) {
      std::fill(dW.begin(), dW.end(), 0.0);
      std::fill(db_e.begin(), db_e.end(), 0.0);
      std::fill(db_d.begin(), db_d.end(), 0.0);
      detail::accumulate_sample_gradient(layer, data[idx], cfg.loss, dW.data(),
                                         db_e.data(), db_d.data());
      const double decay = 2.0 * cfg.weight_decay;
      for (std::size_t k = 0; k < layer.W.size(); ++k)
        layer.W[k] -= alpha * (dW[k] + decay * layer.W[k]);
      for (std::size_t i = 0; i < d_f; ++i) layer.b_e[i] -= alpha * db_e[i];
      for (std::size_t j = 0; j < d_s; ++j) layer.b_d[j] -= alpha * db_d[j];
    }
    const double obj = objective(layer, data, cfg);
    if (!std::isfinite(obj))
      throw TrainingDivergedError("non-finite objective at epoch " +
                                  std::to_string(epoch));
    hist.push_back(obj);
  }
  if (hist.back() > hist.front())
    throw TrainingDivergedError(
        "objective increased over training (" + std::to_string(hist.front()) +
        " -> " + std::to_string(hist.back()) + "); lower the learning rate");
  return layer;
}

/// Greedy layer-wise training: layer k trains on the encoded outputs of
/// layers 0..k-1. Layer k uses the derived seed stream_seed(seed, k) so the
/// whole stack is deterministic from one seed.
inline AutoencoderStack train_stack(const std::vector<std::vector<double>>& data,
                                    const StackConfig& cfg) {
  cfg.validate();
  AutoencoderStack stack;
  stack.config = cfg;
  std::vector<std::vector<double>> current = data;
  for (std::size_t k = 0; k < cfg.layer_feature_dims.size(); ++k) {
    TrainConfig layer_cfg = cfg.train;
    layer_cfg.seed = stream_seed(cfg.train.seed, k);
    std::vector<double> history;
    LayerParams layer = train_layer(current, cfg.layer_feature_dims[k],
                                    layer_cfg, &history);
    if (k + 1 < cfg.layer_feature_dims.size()) {
      std::vector<std::vector<double>> next(current.size());
      for (std::size_t t = 0; t < current.size(); ++t)
        next[t] = encode(layer, current[t]);
      current = std::move(next);
    }
    stack.layers.push_back(std::move(layer));
    stack.loss_history.push_back(std::move(history));
  }
  return stack;
}

/// Top-layer features: the composition of per-layer encodes.
inline std::vector<double> encode_stack(const AutoencoderStack& stack,
                                        const std::vector<double>& s) {
  std::vector<double> f = s;
  for (const auto& layer : stack.layers) f = encode(layer, f);
  return f;
}

namespace detail {

inline void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline void write_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
inline double read_f64(std::ifstream& in) {
  double v = 0.0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
constexpr char kModelMagic[4] = {'T', 'S', 'A', 'E'};
constexpr std::uint64_t kModelVersion = 1;

}  // namespace detail

/// Binary model file: per layer (d_f, d_s, activation, W row-major, b_e,
/// b_d), the stack config, seed, and loss history. Round-trips bit-exactly.
inline void save_stack(const AutoencoderStack& stack, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out.write(detail::kModelMagic, 4);
  detail::write_u64(out, detail::kModelVersion);
  detail::write_f64(out, stack.config.train.learning_rate);
  detail::write_f64(out, stack.config.train.weight_decay);
  detail::write_u64(out, stack.config.train.epochs);
  detail::write_u64(out, stack.config.train.seed);
  detail::write_u64(out, static_cast<std::uint64_t>(stack.config.train.loss));
  detail::write_f64(out, stack.config.train.init_scale);
  detail::write_u64(out,
                    static_cast<std::uint64_t>(stack.config.train.activation));
  detail::write_u64(out, stack.config.layer_feature_dims.size());
  for (const std::size_t d : stack.config.layer_feature_dims)
    detail::write_u64(out, d);
  detail::write_u64(out, stack.layers.size());
  for (std::size_t k = 0; k < stack.layers.size(); ++k) {
    const LayerParams& layer = stack.layers[k];
    detail::write_u64(out, static_cast<std::uint64_t>(layer.activation));
    detail::write_u64(out, layer.d_f);
    detail::write_u64(out, layer.d_s);
    for (const double w : layer.W) detail::write_f64(out, w);
    for (const double b : layer.b_e) detail::write_f64(out, b);
    for (const double b : layer.b_d) detail::write_f64(out, b);
    const auto& hist = k < stack.loss_history.size() ? stack.loss_history[k]
                                                     : std::vector<double>{};
    detail::write_u64(out, hist.size());
    for (const double h : hist) detail::write_f64(out, h);
  }
}

inline AutoencoderStack load_stack(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, detail::kModelMagic, 4) != 0)
    throw ParseError("'" + path + "' is not a tsbreak model file");
  if (detail::read_u64(in) != detail::kModelVersion)
    throw ParseError("unsupported model version in '" + path + "'");
  AutoencoderStack stack;
  stack.config.train.learning_rate = detail::read_f64(in);
  stack.config.train.weight_decay = detail::read_f64(in);
  stack.config.train.epochs = detail::read_u64(in);
  stack.config.train.seed = detail::read_u64(in);
  stack.config.train.loss = static_cast<LossKind>(detail::read_u64(in));
  stack.config.train.init_scale = detail::read_f64(in);
  stack.config.train.activation =
      static_cast<Activation>(detail::read_u64(in));
  const std::uint64_t dims = detail::read_u64(in);
  stack.config.layer_feature_dims.resize(dims);
  for (std::uint64_t i = 0; i < dims; ++i)
    stack.config.layer_feature_dims[i] = detail::read_u64(in);
  const std::uint64_t depth = detail::read_u64(in);
  for (std::uint64_t k = 0; k < depth; ++k) {
    LayerParams layer;
    layer.activation = static_cast<Activation>(detail::read_u64(in));
    layer.d_f = detail::read_u64(in);
    layer.d_s = detail::read_u64(in);
    layer.W.resize(layer.d_f * layer.d_s);
    layer.b_e.resize(layer.d_f);
    layer.b_d.resize(layer.d_s);
    for (auto& w : layer.W) w = detail::read_f64(in);
    for (auto& b : layer.b_e) b = detail::read_f64(in);
    for (auto& b : layer.b_d) b = detail::read_f64(in);
    std::vector<double> hist(detail::read_u64(in));
    for (auto& h : hist) h = detail::read_f64(in);
    stack.layers.push_back(std::move(layer));
    stack.loss_history.push_back(std::move(hist));
  }
  if (!in) throw ParseError("truncated model file '" + path + "'");
  return stack;
}

}  // namespace tsbreak
