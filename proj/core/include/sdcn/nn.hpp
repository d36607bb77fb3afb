#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdcn/errors.hpp"
#include "sdcn/rng.hpp"
#include "sdcn/types.hpp"

namespace sdcn {

enum class Activation { kIdentity, kRelu, kSelu };

// Canonical published SELU constants.
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluLambda = 1.0507009873554805;

inline double selu(double x) {
  return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
}

inline double selu_grad(double x) {
  return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
}

inline double activation_apply(Activation act, double x) {
  switch (act) {
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kSelu:
      return selu(x);
    case Activation::kIdentity:
    default:
      return x;
  }
}

inline double activation_grad(Activation act, double x) {
  switch (act) {
    case Activation::kRelu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::kSelu:
      return selu_grad(x);
    case Activation::kIdentity:
    default:
      return 1.0;
  }
}

/// One fully connected layer: y = act(W x + b), optional inverted dropout
/// applied after the activation at training time.
template <typename T>
struct DenseLayer {
  Mat<T> weights;  // out_dim x in_dim
  Vec<T> bias;     // out_dim
  Activation activation = Activation::kIdentity;
  T dropout_p = T(0);

  Index in_dim() const { return weights.cols(); }
  Index out_dim() const { return weights.rows(); }
};

/// Weights ~ N(0, 2/in_dim), bias zero. Deterministic under the seed.
template <typename T>
DenseLayer<T> kaiming_init(Index in_dim, Index out_dim, std::uint64_t seed) {
  if (in_dim < 1 || out_dim < 1)
    throw InvalidArgumentError("kaiming_init: dimensions must be positive");
  Rng rng(seed);
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_dim));
  DenseLayer<T> layer;
  layer.weights.resize(out_dim, in_dim);
  for (Index r = 0; r < out_dim; ++r)
    for (Index c = 0; c < in_dim; ++c)
      layer.weights(r, c) = static_cast<T>(stddev * rng.normal());
  layer.bias = Vec<T>::Zero(out_dim);
  return layer;
}

/// Intermediates cached by a training-mode forward pass, consumed by the
/// matching backward pass.
template <typename T>
struct LayerCache {
  Mat<T> input;         // batch x in_dim
  Mat<T> preact;        // batch x out_dim
  Mat<T> dropout_mask;  // batch x out_dim with entries 0 or 1/(1-p); may be empty
};

template <typename T>
struct LayerGrad {
  Mat<T> weights;
  Vec<T> bias;
};

/// Per-parameter gradient buffers mirroring a layer stack.
template <typename T>
struct GradientTape {
  std::vector<LayerGrad<T>> layers;

  static GradientTape zeros_like(const std::vector<DenseLayer<T>>& stack) {
    GradientTape tape;
    tape.layers.reserve(stack.size());
    for (const auto& layer : stack)
      tape.layers.push_back({Mat<T>::Zero(layer.out_dim(), layer.in_dim()),
                             Vec<T>::Zero(layer.out_dim())});
    return tape;
  }

  void zero() {
    for (auto& g : layers) {
      g.weights.setZero();
      g.bias.setZero();
    }
  }
};

template <typename T>
Mat<T> layer_forward(const DenseLayer<T>& layer, const Mat<T>& x,
                     bool training = false, Rng* rng = nullptr,
                     LayerCache<T>* cache = nullptr) {
  if (x.cols() != layer.in_dim())
    throw ShapeError("layer_forward: input has " + std::to_string(x.cols()) +
                     " columns, layer expects " + std::to_string(layer.in_dim()));
  Mat<T> z(x.rows(), layer.out_dim());
  z.noalias() = x * layer.weights.transpose();
  z.rowwise() += layer.bias.transpose();
  if (cache) {
    cache->input = x;
    cache->preact = z;
    cache->dropout_mask.resize(0, 0);
  }
  Mat<T> y = z.unaryExpr([act = layer.activation](T v) {
    return static_cast<T>(activation_apply(act, static_cast<double>(v)));
  });
  if (training && layer.dropout_p > T(0)) {
    if (!rng)
      throw StateError("layer_forward: dropout in training mode needs an rng");
    const double p = static_cast<double>(layer.dropout_p);
    const T inv_keep = static_cast<T>(1.0 / (1.0 - p));
    Mat<T> mask(y.rows(), y.cols());
    for (Index r = 0; r < y.rows(); ++r)
      for (Index c = 0; c < y.cols(); ++c)
        mask(r, c) = rng->uniform() < p ? T(0) : inv_keep;
    y.array() *= mask.array();
    if (cache) cache->dropout_mask = std::move(mask);
  }
  return y;
}

/// Backward through one layer. `dy` is the loss gradient at the layer output;
/// returns the gradient at the layer input and fills `grad`.
template <typename T>
Mat<T> layer_backward(const DenseLayer<T>& layer, const LayerCache<T>& cache,
                      const Mat<T>& dy, LayerGrad<T>& grad) {
  if (cache.preact.rows() == 0)
    throw StateError("layer_backward: no cached forward pass");
  if (dy.rows() != cache.preact.rows() || dy.cols() != cache.preact.cols())
    throw ShapeError("layer_backward: dy shape mismatch");
  Mat<T> dz = dy;
  if (cache.dropout_mask.size() > 0) dz.array() *= cache.dropout_mask.array();
  dz.array() *= cache.preact
                    .unaryExpr([act = layer.activation](T v) {
                      return static_cast<T>(
                          activation_grad(act, static_cast<double>(v)));
                    })
                    .array();
  grad.weights.noalias() = dz.transpose() * cache.input;
  grad.bias = dz.colwise().sum().transpose();
  Mat<T> dx(dz.rows(), layer.in_dim());
  dx.noalias() = dz * layer.weights;
  return dx;
}

template <typename T>
Mat<T> stack_forward(const std::vector<DenseLayer<T>>& layers, const Mat<T>& x,
                     bool training = false, Rng* rng = nullptr,
                     std::vector<LayerCache<T>>* caches = nullptr) {
  if (caches) caches->assign(layers.size(), LayerCache<T>{});
  Mat<T> cur = x;
  for (std::size_t i = 0; i < layers.size(); ++i)
    cur = layer_forward(layers[i], cur, training, rng,
                        caches ? &(*caches)[i] : nullptr);
  return cur;
}

/// Backward through a layer stack; returns the gradient at the stack input.
template <typename T>
Mat<T> stack_backward(const std::vector<DenseLayer<T>>& layers,
                      const std::vector<LayerCache<T>>& caches,
                      const Mat<T>& dy_out, GradientTape<T>& tape) {
  if (caches.size() != layers.size())
    throw StateError("stack_backward: cache/layer count mismatch");
  if (tape.layers.size() != layers.size())
    tape = GradientTape<T>::zeros_like(layers);
  Mat<T> d = dy_out;
  for (std::size_t i = layers.size(); i-- > 0;)
    d = layer_backward(layers[i], caches[i], d, tape.layers[i]);
  return d;
}

/// Mean squared error, averaged over batch and dimension.
template <typename T>
T mse_loss(const Mat<T>& x, const Mat<T>& x_rec) {
  if (x.rows() != x_rec.rows() || x.cols() != x_rec.cols())
    throw ShapeError("mse_loss: shape mismatch");
  if (x.size() == 0) throw InvalidArgumentError("mse_loss: empty batch");
  return static_cast<T>((x_rec - x).squaredNorm() /
                        static_cast<double>(x.rows() * x.cols()));
}

/// d mse / d x_rec.
template <typename T>
Mat<T> mse_loss_grad(const Mat<T>& x, const Mat<T>& x_rec) {
  if (x.rows() != x_rec.rows() || x.cols() != x_rec.cols())
    throw ShapeError("mse_loss_grad: shape mismatch");
  return (x_rec - x) * static_cast<T>(2.0 / static_cast<double>(x.rows() * x.cols()));
}

template <typename T>
struct AdamConfig {
  T learning_rate = static_cast<T>(1e-3);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T epsilon = static_cast<T>(1e-8);
};

template <typename T>
struct AdamState {
  AdamConfig<T> config;
  std::vector<LayerGrad<T>> first_moment;
  std::vector<LayerGrad<T>> second_moment;
  std::int64_t step = 0;

  static AdamState init(const std::vector<DenseLayer<T>>& stack,
                        AdamConfig<T> config = {}) {
    AdamState state;
    state.config = config;
    state.first_moment = GradientTape<T>::zeros_like(stack).layers;
    state.second_moment = GradientTape<T>::zeros_like(stack).layers;
    return state;
  }
};

namespace detail {

template <typename T, typename Param>
void adam_update(Param& theta, const Param& grad, Param& m, Param& v,
                 const AdamConfig<T>& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (T(1) - cfg.beta1) * grad;
  v = (cfg.beta2 * v.array() + (T(1) - cfg.beta2) * grad.array().square()).matrix();
  theta.array() -= static_cast<T>(cfg.learning_rate) *
                   (m.array() / static_cast<T>(bc1)) /
                   ((v.array() / static_cast<T>(bc2)).sqrt() + cfg.epsilon);
}

}  // namespace detail

/// One Adam step over a layer stack. Throws StateError naming the offending
/// layer if any gradient entry is non-finite.
template <typename T>
void adam_step(std::vector<DenseLayer<T>>& layers, const GradientTape<T>& tape,
               AdamState<T>& state, const std::string& stack_name = "stack") {
  if (tape.layers.size() != layers.size())
    throw StateError("adam_step: tape does not mirror the layer stack");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!tape.layers[i].weights.allFinite() || !tape.layers[i].bias.allFinite())
      throw StateError("adam_step: non-finite gradient in " + stack_name +
                       " layer " + std::to_string(i));
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(static_cast<double>(state.config.beta1),
                                    static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(static_cast<double>(state.config.beta2),
                                    static_cast<double>(state.step));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    detail::adam_update(layers[i].weights, tape.layers[i].weights,
                        state.first_moment[i].weights,
                        state.second_moment[i].weights, state.config, bc1, bc2);
    detail::adam_update(layers[i].bias, tape.layers[i].bias,
                        state.first_moment[i].bias,
                        state.second_moment[i].bias, state.config, bc1, bc2);
  }
}

}  // namespace sdcn
