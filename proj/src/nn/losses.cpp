#include "shapes2toon/nn/losses.hpp"

namespace s2t::nn {

namespace {

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

}  // namespace

template <typename T>
Var<T> discriminator_loss(Var<T> d_real, Var<T> d_fake) {
  require_same_shape(d_real.shape(), d_fake.shape(), "gan_loss");
  return add(mean_softplus(d_real, T(-1)), mean_softplus(d_fake, T(1)));
}

template <typename T>
Var<T> generator_adv_loss(Var<T> d_fake) {
  return mean_softplus(d_fake, T(-1));
}

template <typename T>
GanLosses<T> gan_loss(Var<T> d_real, Var<T> d_fake) {
  return {discriminator_loss(d_real, d_fake), generator_adv_loss(d_fake)};
}

template <typename T>
Var<T> l1_loss(Var<T> a, Var<T> b) {
  require_same_shape(a.shape(), b.shape(), "l1_loss");
  return mean_abs_diff(a, b);
}

template <typename T>
Var<T> pix2pix_objective(Var<T> d_fake_for_g, Var<T> gen_out, Var<T> target, const LossWeights& w) {
  w.validate();
  const Var<T> adv = generator_adv_loss(d_fake_for_g);
  const Var<T> l1 = l1_loss(gen_out, target);
  return add(adv, affine(l1, static_cast<T>(w.lambda_l1), T(0)));
}

#define S2T_INSTANTIATE_LOSSES(T)                                   \
  template Var<T> discriminator_loss(Var<T>, Var<T>);               \
  template Var<T> generator_adv_loss(Var<T>);                       \
  template GanLosses<T> gan_loss(Var<T>, Var<T>);                   \
  template Var<T> l1_loss(Var<T>, Var<T>);                          \
  template Var<T> pix2pix_objective(Var<T>, Var<T>, Var<T>, const LossWeights&);

S2T_INSTANTIATE_LOSSES(float)
S2T_INSTANTIATE_LOSSES(double)

}  // namespace s2t::nn
