#include "shapes2toon/nn/models.hpp"

#include <bit>

namespace s2t::nn {

using nlohmann::json;

namespace {

constexpr double kInitStd = 0.02;
constexpr double kLeakySlope = 0.2;

template <typename T>
void init_normal(Tensor<T>& t, Rng& rng, double mean, double stddev) {
  for (auto& v : t.values()) v = static_cast<T>(rng.normal(mean, stddev));
}

template <typename T>
ConvLayer make_conv(ParameterSet<T>& params, const std::string& name, Shape weight_shape, int out_channels,
                    const ConvGeometry& g, Rng& rng) {
  ConvLayer layer;
  layer.geometry = g;
  layer.weight = params.size();
  init_normal(params.add(name + ".weight", std::move(weight_shape)).value, rng, 0.0, kInitStd);
  layer.bias = params.size();
  params.add(name + ".bias", {out_channels});
  return layer;
}

template <typename T>
NormLayer make_norm(ParameterSet<T>& params, const std::string& name, int channels, Rng& rng) {
  NormLayer n;
  n.gamma = params.size();
  init_normal(params.add(name + ".gamma", {channels}).value, rng, 1.0, kInitStd);
  n.beta = params.size();
  params.add(name + ".beta", {channels});
  return n;
}

template <typename T>
Var<T> bind(Tape<T>& tape, const ParameterSet<T>& params, std::size_t idx, bool train) {
  if (train) return tape.parameter(const_cast<Parameter<T>&>(params[idx]));
  return tape.frozen(params[idx]);
}

template <typename T>
void copy_params(const ParameterSet<T>& from, ParameterSet<T>& to) {
  for (std::size_t i = 0; i < from.size(); ++i) {
    to[i].value = from[i].value;
    to[i].grad = Tensor<T>(from[i].value.shape());
  }
}

}  // namespace

// --- configs ----------------------------------------------------------------

int GeneratorConfig::resolved_depth() const {
  if (depth > 0) return depth;
  return std::bit_width(static_cast<unsigned>(image_size)) - 2;  // log2(size) - 1
}

int GeneratorConfig::filters(int stage) const { return ng * std::min(1 << std::min(stage, 3), 8); }

void GeneratorConfig::validate() const {
  if (ng < 1) throw ValidationError("ng must be >= 1", "generator.ng");
  if (in_channels < 1 || out_channels < 1) throw ValidationError("channel counts must be >= 1", "generator.channels");
  if (image_size < 8 || !std::has_single_bit(static_cast<unsigned>(image_size)))
    throw ValidationError("image_size must be a power of two >= 8", "generator.image_size");
  const int d = resolved_depth();
  if (d < 2 || d > 30 || image_size % (1 << d) != 0)
    throw ValidationError("image_size must be divisible by 2^depth", "generator.depth");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ValidationError("dropout_p must lie in [0,1)", "generator.dropout_p");
  if (dropout_stages < 0) throw ValidationError("dropout_stages must be >= 0", "generator.dropout_stages");
}

json GeneratorConfig::to_json() const {
  return {{"ng", ng},
          {"in_channels", in_channels},
          {"out_channels", out_channels},
          {"image_size", image_size},
          {"depth", resolved_depth()},
          {"dropout_p", dropout_p},
          {"dropout_stages", dropout_stages}};
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
  GeneratorConfig c;
  c.ng = j.at("ng").get<int>();
  c.in_channels = j.at("in_channels").get<int>();
  c.out_channels = j.at("out_channels").get<int>();
  c.image_size = j.at("image_size").get<int>();
  c.depth = j.value("depth", 0);
  c.dropout_p = j.value("dropout_p", 0.5);
  c.dropout_stages = j.value("dropout_stages", 3);
  c.validate();
  return c;
}

void DiscriminatorConfig::validate() const {
  if (nd < 1) throw ValidationError("nd must be >= 1", "discriminator.nd");
  if (in_channels < 1) throw ValidationError("in_channels must be >= 1", "discriminator.in_channels");
  if (n_strided < 0) throw ValidationError("n_strided must be >= 0", "discriminator.n_strided");
  if (kernel < 1 || padding < 0) throw ValidationError("invalid kernel/padding", "discriminator.kernel");
}

std::vector<std::pair<int, int>> DiscriminatorConfig::stack() const {
  std::vector<std::pair<int, int>> s;
  for (int i = 0; i < n_strided; ++i) s.emplace_back(kernel, 2);
  s.emplace_back(kernel, 1);
  s.emplace_back(kernel, 1);
  return s;
}

int DiscriminatorConfig::receptive_field() const { return nn::receptive_field(stack()); }

int DiscriminatorConfig::output_size(int input_size) const {
  int s = input_size;
  for (const auto& [k, stride] : stack()) s = conv_output_size(s, {k, stride, padding});
  return s;
}

json DiscriminatorConfig::to_json() const {
  return {{"nd", nd}, {"in_channels", in_channels}, {"n_strided", n_strided}, {"kernel", kernel}, {"padding", padding}};
}

DiscriminatorConfig DiscriminatorConfig::from_json(const json& j) {
  DiscriminatorConfig c;
  c.nd = j.at("nd").get<int>();
  c.in_channels = j.value("in_channels", 6);
  c.n_strided = j.value("n_strided", 3);
  c.kernel = j.value("kernel", 4);
  c.padding = j.value("padding", 1);
  c.validate();
  return c;
}

int receptive_field(const std::vector<std::pair<int, int>>& stack) {
  int rf = 1;
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) rf = rf * it->second + (it->first - it->second);
  return rf;
}

// --- U-Net --------------------------------------------------------------------

template <typename T>
UNetGenerator<T>::UNetGenerator(const GeneratorConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const int depth = cfg_.resolved_depth();
  const ConvGeometry down{4, 2, 1};
  for (int i = 0; i < depth; ++i) {
    const int in = i == 0 ? cfg_.in_channels : cfg_.filters(i - 1);
    const int out = cfg_.filters(i);
    const std::string name = "g.enc" + std::to_string(i);
    Stage s;
    s.conv = make_conv(params_, name, {out, in, 4, 4}, out, down, rng);
    if (i != 0 && i != depth - 1) s.norm = make_norm(params_, name + ".norm", out, rng);
    encoder_.push_back(s);
  }
  // Decoder stage j (innermost first) produces filters(j-1) channels at the
  // resolution of encoder stage j-1, then concatenates that stage.
  for (int j = depth - 1; j >= 1; --j) {
    const int in = j == depth - 1 ? cfg_.filters(j) : 2 * cfg_.filters(j);
    const int out = cfg_.filters(j - 1);
    const std::string name = "g.dec" + std::to_string(j);
    Stage s;
    s.conv = make_conv(params_, name, {in, out, 4, 4}, out, down, rng);
    s.norm = make_norm(params_, name + ".norm", out, rng);
    s.dropout = static_cast<int>(decoder_.size()) < cfg_.dropout_stages && cfg_.dropout_p > 0.0;
    decoder_.push_back(s);
  }
  Stage out;
  const int in = depth == 1 ? cfg_.filters(0) : 2 * cfg_.filters(0);
  out.conv = make_conv(params_, "g.out", {in, cfg_.out_channels, 4, 4}, cfg_.out_channels, down, rng);
  decoder_.push_back(out);
}

template <typename T>
Var<T> UNetGenerator<T>::forward(Tape<T>& tape, Var<T> x, Rng* dropout_rng) {
  return run(tape, x, dropout_rng, true);
}

template <typename T>
Var<T> UNetGenerator<T>::infer(Tape<T>& tape, Var<T> x, Rng* dropout_rng) const {
  return run(tape, x, dropout_rng, false);
}

template <typename T>
Var<T> UNetGenerator<T>::run(Tape<T>& tape, Var<T> x, Rng* dropout_rng, bool train) const {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != cfg_.in_channels || s[2] != cfg_.image_size || s[3] != cfg_.image_size)
    throw ValidationError("unet input stage: expected [B," + std::to_string(cfg_.in_channels) + "," +
                          std::to_string(cfg_.image_size) + "," + std::to_string(cfg_.image_size) + "], got " +
                          shape_str(s));
  auto p = [&](std::size_t idx) { return bind(tape, params_, idx, train); };

  Var<T> h = affine(x, T(2), T(-1));
  std::vector<Var<T>> skips;
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    const Stage& st = encoder_[i];
    if (i != 0) h = leaky_relu(h, T(kLeakySlope));
    h = conv2d(h, p(st.conv.weight), p(st.conv.bias), st.conv.geometry);
    if (st.norm) h = instance_norm(h, p(st.norm->gamma), p(st.norm->beta));
    skips.push_back(h);
  }
  skips.pop_back();  // the bottleneck feeds the decoder directly

  for (std::size_t j = 0; j + 1 < decoder_.size(); ++j) {
    const Stage& st = decoder_[j];
    h = relu(h);
    h = conv_transpose2d(h, p(st.conv.weight), p(st.conv.bias), st.conv.geometry);
    if (st.norm) h = instance_norm(h, p(st.norm->gamma), p(st.norm->beta));
    if (st.dropout && dropout_rng != nullptr) h = dropout(h, static_cast<T>(cfg_.dropout_p), *dropout_rng);
    const Var<T> skip = skips.back();
    skips.pop_back();
    if (skip.shape()[2] != h.shape()[2])
      throw ValidationError("unet decoder stage " + std::to_string(j) + ": skip " + shape_str(skip.shape()) +
                            " does not match " + shape_str(h.shape()));
    h = concat_channels(h, skip);
  }
  const Stage& out = decoder_.back();
  h = relu(h);
  h = conv_transpose2d(h, p(out.conv.weight), p(out.conv.bias), out.conv.geometry);
  h = tanh(h);
  return affine(h, T(0.5), T(0.5));
}

template <typename T>
void UNetGenerator<T>::zero_output_layer() {
  const Stage& out = decoder_.back();
  params_[out.conv.weight].value.fill(T(0));
  params_[out.conv.bias].value.fill(T(0));
}

template <typename T>
template <typename U>
UNetGenerator<U> UNetGenerator<T>::cast() const {
  UNetGenerator<U> g(cfg_, 0);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    g.params_[i].value = params_[i].value.template cast<U>();
    g.params_[i].grad = Tensor<U>(params_[i].value.shape());
  }
  return g;
}

// --- PatchGAN -----------------------------------------------------------------

template <typename T>
PatchGan<T>::PatchGan(const DiscriminatorConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  int in = cfg_.in_channels;
  int mult = 1;
  const auto stack = cfg_.stack();
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const bool head = i + 1 == stack.size();
    const int out = head ? 1 : cfg_.nd * mult;
    const std::string name = "d.conv" + std::to_string(i);
    Stage s;
    s.conv = make_conv(params_, name, {out, in, cfg_.kernel, cfg_.kernel}, out,
                       {stack[i].first, stack[i].second, cfg_.padding}, rng);
    if (i != 0 && !head) s.norm = make_norm(params_, name + ".norm", out, rng);
    s.activation = !head;
    stages_.push_back(s);
    in = out;
    mult = std::min(mult * 2, 8);
  }
}

template <typename T>
Var<T> PatchGan<T>::forward(Tape<T>& tape, Var<T> source, Var<T> target) {
  return run(tape, source, target, true);
}

template <typename T>
Var<T> PatchGan<T>::infer(Tape<T>& tape, Var<T> source, Var<T> target) const {
  return run(tape, source, target, false);
}

template <typename T>
Var<T> PatchGan<T>::run(Tape<T>& tape, Var<T> source, Var<T> target, bool train) const {
  const Shape& a = source.shape();
  const Shape& b = target.shape();
  if (a.size() != 4 || b.size() != 4 || a[0] != b[0] || a[2] != b[2] || a[3] != b[3])
    throw ValidationError("patchgan: source " + shape_str(a) + " and target " + shape_str(b) +
                          " must share batch and spatial size");
  if (a[1] + b[1] != cfg_.in_channels)
    throw ValidationError("patchgan: expected " + std::to_string(cfg_.in_channels) + " input channels in total");
  auto p = [&](std::size_t idx) { return bind(tape, params_, idx, train); };
  Var<T> h = affine(concat_channels(source, target), T(2), T(-1));
  for (const Stage& st : stages_) {
    h = conv2d(h, p(st.conv.weight), p(st.conv.bias), st.conv.geometry);
    if (st.norm) h = instance_norm(h, p(st.norm->gamma), p(st.norm->beta));
    if (st.activation) h = leaky_relu(h, T(kLeakySlope));
  }
  return h;
}

template <typename T>
template <typename U>
PatchGan<U> PatchGan<T>::cast() const {
  PatchGan<U> d(cfg_, 0);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    d.params_[i].value = params_[i].value.template cast<U>();
    d.params_[i].grad = Tensor<U>(params_[i].value.shape());
  }
  return d;
}

template class UNetGenerator<float>;
template class UNetGenerator<double>;
template class PatchGan<float>;
template class PatchGan<double>;
template UNetGenerator<double> UNetGenerator<float>::cast<double>() const;
template UNetGenerator<float> UNetGenerator<double>::cast<float>() const;
template PatchGan<double> PatchGan<float>::cast<double>() const;
template PatchGan<float> PatchGan<double>::cast<float>() const;

}  // namespace s2t::nn
