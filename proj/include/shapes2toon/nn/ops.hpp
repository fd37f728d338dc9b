#pragma once

#include <optional>

#include "shapes2toon/nn/tape.hpp"
#include "shapes2toon/rng.hpp"

namespace s2t::nn {

struct ConvGeometry {
  int kernel = 4;
  int stride = 2;
  int padding = 1;
};

inline int conv_output_size(int in, const ConvGeometry& g) { return (in + 2 * g.padding - g.kernel) / g.stride + 1; }
inline int conv_transpose_output_size(int in, const ConvGeometry& g) {
  return (in - 1) * g.stride - 2 * g.padding + g.kernel;
}

// x: [N,C,H,W], weight: [O,C,k,k], bias: [O].
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> weight, std::optional<Var<T>> bias, const ConvGeometry& g);

// x: [N,C,H,W], weight: [C,O,k,k] (input channels first), bias: [O].
template <typename T>
Var<T> conv_transpose2d(Var<T> x, Var<T> weight, std::optional<Var<T>> bias, const ConvGeometry& g);

// Per-sample, per-channel normalization over H*W with affine gamma/beta [C].
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> weight, Var<T> bias, const ConvGeometry& g) {
  return conv2d(x, weight, std::optional<Var<T>>(bias), g);
}
template <typename T>
Var<T> conv_transpose2d(Var<T> x, Var<T> weight, Var<T> bias, const ConvGeometry& g) {
  return conv_transpose2d(x, weight, std::optional<Var<T>>(bias), g);
}

template <typename T>
Var<T> instance_norm(Var<T> x, Var<T> gamma, Var<T> beta, T eps = T(1e-5));

template <typename T>
Var<T> leaky_relu(Var<T> x, T slope);
template <typename T>
Var<T> relu(Var<T> x) {
  return leaky_relu(x, T(0));
}
template <typename T>
Var<T> tanh(Var<T> x);

// Inverted dropout: kept units scaled by 1/(1-p). Mask drawn from rng.
template <typename T>
Var<T> dropout(Var<T> x, T p, Rng& rng);

// Channel concatenation of [N,Ca,H,W] and [N,Cb,H,W].
template <typename T>
Var<T> concat_channels(Var<T> a, Var<T> b);

// y = scale * x + shift, elementwise.
template <typename T>
Var<T> affine(Var<T> x, T scale, T shift);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);

template <typename T>
Var<T> mean(Var<T> x);

// mean |a - b|
template <typename T>
Var<T> mean_abs_diff(Var<T> a, Var<T> b);

// mean softplus(sign * x), computed as max(z,0) + log1p(exp(-|z|)).
template <typename T>
Var<T> mean_softplus(Var<T> x, T sign);

template <typename T>
Var<T> detach(Var<T> x) {
  return x.tape->constant(x.value());
}

template <typename T>
T softplus(T z) {
  return std::max(z, T(0)) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace s2t::nn
