#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapes2toon/nn/ops.hpp"

namespace s2t::nn {

// Named parameters with stable addresses (the tape borrows them).
template <typename T>
class ParameterSet {
 public:
  Parameter<T>& add(std::string name, Shape shape) {
    params_.push_back({std::move(name), Tensor<T>(shape), Tensor<T>(shape)});
    return params_.back();
  }

  std::deque<Parameter<T>>& items() { return params_; }
  const std::deque<Parameter<T>>& items() const { return params_; }
  Parameter<T>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.numel();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad = Tensor<T>(p.value.shape());
  }

 private:
  std::deque<Parameter<T>> params_;
};

struct GeneratorConfig {
  int ng = 64;
  int in_channels = 3;
  int out_channels = 3;
  int image_size = 256;
  int depth = 0;  // 0: log2(image_size) - 1
  double dropout_p = 0.5;
  int dropout_stages = 3;  // innermost decoder stages with dropout

  int resolved_depth() const;
  int filters(int stage) const;  // ng * min(2^stage, 8)
  void validate() const;

  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
  bool operator==(const GeneratorConfig&) const = default;
};

struct DiscriminatorConfig {
  int nd = 64;
  int in_channels = 6;  // source and target, channel-concatenated
  int n_strided = 3;    // stride-2 stages before the stride-1 stage and head
  int kernel = 4;
  int padding = 1;

  void validate() const;
  // (kernel, stride) of every conv, input to output.
  std::vector<std::pair<int, int>> stack() const;
  int receptive_field() const;
  int output_size(int input_size) const;

  nlohmann::json to_json() const;
  static DiscriminatorConfig from_json(const nlohmann::json& j);
  bool operator==(const DiscriminatorConfig&) const = default;
};

// rf <- rf * stride + (kernel - stride), folded from the output unit back to
// the input.
int receptive_field(const std::vector<std::pair<int, int>>& kernel_stride_stack);

struct ConvLayer {
  std::size_t weight = 0;
  std::size_t bias = 0;
  ConvGeometry geometry;
};

struct NormLayer {
  std::size_t gamma = 0;
  std::size_t beta = 0;
};

template <typename T>
class UNetGenerator {
 public:
  UNetGenerator(const GeneratorConfig& cfg, std::uint64_t seed);

  const GeneratorConfig& config() const { return cfg_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }

  // x in [0,1], [B,in_channels,S,S] -> [B,out_channels,S,S] in [0,1].
  // Dropout draws from `dropout_rng`; nullptr disables it.
  Var<T> forward(Tape<T>& tape, Var<T> x, Rng* dropout_rng);
  // Same graph with read-only parameters.
  Var<T> infer(Tape<T>& tape, Var<T> x, Rng* dropout_rng) const;

  // Zeroes the output layer, pinning the output at the tanh midpoint.
  void zero_output_layer();

  template <typename U>
  UNetGenerator<U> cast() const;

 private:
  template <typename U>
  friend class UNetGenerator;

  struct Stage {
    ConvLayer conv;
    std::optional<NormLayer> norm;
    bool dropout = false;
  };

  Var<T> run(Tape<T>& tape, Var<T> x, Rng* dropout_rng, bool train) const;

  GeneratorConfig cfg_;
  ParameterSet<T> params_;
  std::vector<Stage> encoder_;
  std::vector<Stage> decoder_;  // innermost first; the last one is the output layer
};

template <typename T>
class PatchGan {
 public:
  PatchGan(const DiscriminatorConfig& cfg, std::uint64_t seed);

  const DiscriminatorConfig& config() const { return cfg_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }

  // Images in [0,1]; returns per-patch logits [B,1,h',w'].
  Var<T> forward(Tape<T>& tape, Var<T> source, Var<T> target);
  Var<T> infer(Tape<T>& tape, Var<T> source, Var<T> target) const;

  template <typename U>
  PatchGan<U> cast() const;

 private:
  template <typename U>
  friend class PatchGan;

  struct Stage {
    ConvLayer conv;
    std::optional<NormLayer> norm;
    bool activation = true;
  };

  Var<T> run(Tape<T>& tape, Var<T> source, Var<T> target, bool train) const;

  DiscriminatorConfig cfg_;
  ParameterSet<T> params_;
  std::vector<Stage> stages_;
};

template <typename T>
struct Pix2Pix {
  Pix2Pix(const GeneratorConfig& g, const DiscriminatorConfig& d, std::uint64_t seed)
      : generator(g, derive_seed(seed, 1)), discriminator(d, derive_seed(seed, 2)) {}
  Pix2Pix(UNetGenerator<T> g, PatchGan<T> d) : generator(std::move(g)), discriminator(std::move(d)) {}

  UNetGenerator<T> generator;
  PatchGan<T> discriminator;
};

}  // namespace s2t::nn
