#pragma once

#include <cmath>
#include <vector>

#include "shapes2toon/nn/models.hpp"

namespace s2t::nn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam(ParameterSet<T>& params, AdamConfig cfg) : params_(params), cfg_(cfg) {
    for (const auto& p : params_.items()) {
      m_.emplace_back(p.value.numel(), T(0));
      v_.emplace_back(p.value.numel(), T(0));
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Parameter<T>& p = params_[i];
      if (p.grad.numel() != p.value.numel()) continue;
      const std::size_t count = p.value.numel();
      T* __restrict m = m_[i].data();
      T* __restrict v = v_[i].data();
      T* __restrict w = p.value.data();
      const T* __restrict g = p.grad.data();
      const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
      const T rate = static_cast<T>(cfg_.lr / c1);
      const T inv_c2 = static_cast<T>(1.0 / c2);
      const T eps = static_cast<T>(cfg_.eps);
      for (std::size_t k = 0; k < count; ++k) {
        m[k] = b1 * m[k] + (T(1) - b1) * g[k];
        v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
        w[k] -= rate * m[k] / (std::sqrt(v[k] * inv_c2) + eps);
      }
    }
  }

  long steps() const { return t_; }

 private:
  ParameterSet<T>& params_;
  AdamConfig cfg_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  long t_ = 0;
};

}  // namespace s2t::nn
