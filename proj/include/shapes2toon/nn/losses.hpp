#pragma once

#include "shapes2toon/nn/ops.hpp"

namespace s2t::nn {

struct LossWeights {
  double lambda_l1 = 100.0;
  void validate() const {
    if (!(lambda_l1 >= 0.0)) throw ValidationError("lambda_l1 must be >= 0", "lambda_l1");
  }
};

template <typename T>
struct GanLosses {
  Var<T> loss_d;
  Var<T> loss_g;
};

// loss_d = -mean log sigmoid(real) - mean log(1 - sigmoid(fake)),
// loss_g = -mean log sigmoid(fake). Both via softplus, so large logits stay finite.
template <typename T>
GanLosses<T> gan_loss(Var<T> d_real, Var<T> d_fake);

template <typename T>
Var<T> discriminator_loss(Var<T> d_real, Var<T> d_fake);

template <typename T>
Var<T> generator_adv_loss(Var<T> d_fake);

template <typename T>
Var<T> l1_loss(Var<T> a, Var<T> b);

template <typename T>
Var<T> pix2pix_objective(Var<T> d_fake_for_g, Var<T> gen_out, Var<T> target, const LossWeights& w);

}  // namespace s2t::nn
