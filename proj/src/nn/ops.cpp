#include "shapes2toon/nn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace s2t::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

void require_rank4(const Shape& s, const char* what) {
  if (s.size() != 4) throw ValidationError(std::string(what) + ": expected [N,C,H,W], got " + shape_str(s));
}

// cols[(c*k + ki)*k + kj][oh*wo + ow] = img[c][oh*s - p + ki][ow*s - p + kj]
template <typename T>
void im2col(const T* img, int channels, int h, int w, const ConvGeometry& g, int ho, int wo, T* cols) {
  const int k = g.kernel;
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int c = 0; c < channels; ++c) {
    const T* src = img + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        T* out = cols + (static_cast<std::size_t>(c * k + ki) * k + kj) * plane;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * g.stride - g.padding + ki;
          T* row = out + static_cast<std::size_t>(oh) * wo;
          if (ih < 0 || ih >= h) {
            std::fill(row, row + wo, T(0));
            continue;
          }
          const T* in_row = src + static_cast<std::size_t>(ih) * w;
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * g.stride - g.padding + kj;
            row[ow] = (iw >= 0 && iw < w) ? in_row[iw] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-adds columns back into the image.
template <typename T>
void col2im(const T* cols, int channels, int h, int w, const ConvGeometry& g, int ho, int wo, T* img) {
  const int k = g.kernel;
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int c = 0; c < channels; ++c) {
    T* dst = img + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const T* in = cols + (static_cast<std::size_t>(c * k + ki) * k + kj) * plane;
        for (int oh = 0; oh < ho; ++oh) {
          const int ih = oh * g.stride - g.padding + ki;
          if (ih < 0 || ih >= h) continue;
          T* out_row = dst + static_cast<std::size_t>(ih) * w;
          const T* row = in + static_cast<std::size_t>(oh) * wo;
          for (int ow = 0; ow < wo; ++ow) {
            const int iw = ow * g.stride - g.padding + kj;
            if (iw >= 0 && iw < w) out_row[iw] += row[ow];
          }
        }
      }
    }
  }
}

// out (k x p, row-major) = W^T X for row-major W (o x k) and X (o x p).
// Eigen is slow on this shape when p is small, so the product is formed as
// (X^T W)^T there.
template <typename T>
void gemm_tn(ConstMatMap<T> w, ConstMatMap<T> x, T* out) {
  const auto k = w.cols();
  const auto p = x.cols();
  if (p <= 64) {
    RowMat<T> t(p, k);
    t.noalias() = x.transpose() * w;
    MatMap<T>(out, k, p) = t.transpose();
  } else {
    MatMap<T>(out, k, p).noalias() = w.transpose() * x;
  }
}

template <typename T>
Var<T> record_with_optional(Tape<T>& tape, const char* op, Tensor<T> value, Var<T> a, Var<T> b,
                            std::optional<Var<T>> c, typename Tape<T>::BackwardFn fn) {
  if (c) return tape.record(op, std::move(value), {a, b, *c}, std::move(fn));
  return tape.record(op, std::move(value), {a, b}, std::move(fn));
}

}  // namespace

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> weight, std::optional<Var<T>> bias, const ConvGeometry& g) {
  const Tensor<T>& X = x.value();
  const Tensor<T>& W = weight.value();
  require_rank4(X.shape(), "conv2d input");
  require_rank4(W.shape(), "conv2d weight");
  const int n = X.dim(0), c = X.dim(1), h = X.dim(2), w = X.dim(3);
  const int o = W.dim(0);
  if (W.dim(1) != c || W.dim(2) != g.kernel || W.dim(3) != g.kernel)
    throw ValidationError("conv2d: weight " + shape_str(W.shape()) + " does not fit input " + shape_str(X.shape()));
  if (bias && bias->value().numel() != static_cast<std::size_t>(o)) throw ValidationError("conv2d: bias size mismatch");
  const int ho = conv_output_size(h, g);
  const int wo = conv_output_size(w, g);
  if (ho <= 0 || wo <= 0) throw ValidationError("conv2d: input " + shape_str(X.shape()) + " too small for kernel");

  const int ckk = c * g.kernel * g.kernel;
  const int plane = ho * wo;
  Tensor<T> Y({n, o, ho, wo});
  AlignedVector<T> cols(static_cast<std::size_t>(ckk) * plane);
  ConstMatMap<T> wm(W.data(), o, ckk);
  for (int b = 0; b < n; ++b) {
    im2col(X.data() + static_cast<std::size_t>(b) * c * h * w, c, h, w, g, ho, wo, cols.data());
    MatMap<T> yb(Y.data() + static_cast<std::size_t>(b) * o * plane, o, plane);
    yb.noalias() = wm * ConstMatMap<T>(cols.data(), ckk, plane);
    if (bias) {
      const T* bv = bias->value().data();
      for (int oc = 0; oc < o; ++oc) yb.row(oc).array() += bv[oc];
    }
  }

  const std::size_t xid = x.id, wid = weight.id;
  const std::optional<std::size_t> bid = bias ? std::optional(bias->id) : std::nullopt;
  return record_with_optional<T>(
      *x.tape, "conv2d", std::move(Y), x, weight, bias,
      [=](Tape<T>& t, std::size_t self) {
        const Tensor<T>& X = t.value(xid);
        const Tensor<T>& W = t.value(wid);
        const Tensor<T>& gy = t.grad(self);
        const bool need_x = t.requires_grad(xid);
        const bool need_w = t.requires_grad(wid);
        const bool need_b = bid && t.requires_grad(*bid);
        AlignedVector<T> buf(static_cast<std::size_t>(ckk) * plane);
        ConstMatMap<T> wm(W.data(), o, ckk);
        for (int b = 0; b < n; ++b) {
          ConstMatMap<T> gyb(gy.data() + static_cast<std::size_t>(b) * o * plane, o, plane);
          if (need_w) {
            im2col(X.data() + static_cast<std::size_t>(b) * c * h * w, c, h, w, g, ho, wo, buf.data());
            MatMap<T>(t.grad(wid).data(), o, ckk).noalias() += gyb * ConstMatMap<T>(buf.data(), ckk, plane).transpose();
          }
          if (need_b) {
            T* gb = t.grad(*bid).data();
            for (int oc = 0; oc < o; ++oc) gb[oc] += gyb.row(oc).sum();
          }
          if (need_x) {
            gemm_tn<T>(wm, gyb, buf.data());
            col2im(buf.data(), c, h, w, g, ho, wo, t.grad(xid).data() + static_cast<std::size_t>(b) * c * h * w);
          }
        }
      });
}

template <typename T>
Var<T> conv_transpose2d(Var<T> x, Var<T> weight, std::optional<Var<T>> bias, const ConvGeometry& g) {
  const Tensor<T>& X = x.value();
  const Tensor<T>& W = weight.value();
  require_rank4(X.shape(), "conv_transpose2d input");
  require_rank4(W.shape(), "conv_transpose2d weight");
  const int n = X.dim(0), c = X.dim(1), h = X.dim(2), w = X.dim(3);
  const int o = W.dim(1);
  if (W.dim(0) != c || W.dim(2) != g.kernel || W.dim(3) != g.kernel)
    throw ValidationError("conv_transpose2d: weight " + shape_str(W.shape()) + " does not fit input " +
                          shape_str(X.shape()));
  if (bias && bias->value().numel() != static_cast<std::size_t>(o))
    throw ValidationError("conv_transpose2d: bias size mismatch");
  const int ho = conv_transpose_output_size(h, g);
  const int wo = conv_transpose_output_size(w, g);
  if (ho <= 0 || wo <= 0) throw ValidationError("conv_transpose2d: empty output");

  // Transposed conv is the adjoint of a conv from [o,ho,wo] to [c,h,w].
  const int okk = o * g.kernel * g.kernel;
  const int plane = h * w;
  const std::size_t out_plane = static_cast<std::size_t>(ho) * wo;
  Tensor<T> Y({n, o, ho, wo});
  AlignedVector<T> cols(static_cast<std::size_t>(okk) * plane);
  ConstMatMap<T> wm(W.data(), c, okk);
  for (int b = 0; b < n; ++b) {
    gemm_tn<T>(wm, ConstMatMap<T>(X.data() + static_cast<std::size_t>(b) * c * plane, c, plane), cols.data());
    T* yb = Y.data() + static_cast<std::size_t>(b) * o * out_plane;
    col2im(cols.data(), o, ho, wo, g, h, w, yb);
    if (bias) {
      const T* bv = bias->value().data();
      for (int oc = 0; oc < o; ++oc) {
        T* p = yb + static_cast<std::size_t>(oc) * out_plane;
        for (std::size_t i = 0; i < out_plane; ++i) p[i] += bv[oc];
      }
    }
  }

  const std::size_t xid = x.id, wid = weight.id;
  const std::optional<std::size_t> bid = bias ? std::optional(bias->id) : std::nullopt;
  return record_with_optional<T>(
      *x.tape, "conv_transpose2d", std::move(Y), x, weight, bias,
      [=](Tape<T>& t, std::size_t self) {
        const Tensor<T>& X = t.value(xid);
        const Tensor<T>& W = t.value(wid);
        const Tensor<T>& gy = t.grad(self);
        const bool need_x = t.requires_grad(xid);
        const bool need_w = t.requires_grad(wid);
        const bool need_b = bid && t.requires_grad(*bid);
        AlignedVector<T> buf(static_cast<std::size_t>(okk) * plane);
        ConstMatMap<T> wm(W.data(), c, okk);
        for (int b = 0; b < n; ++b) {
          const T* gyb = gy.data() + static_cast<std::size_t>(b) * o * out_plane;
          if (need_b) {
            T* gb = t.grad(*bid).data();
            for (int oc = 0; oc < o; ++oc) {
              T s = 0;
              const T* p = gyb + static_cast<std::size_t>(oc) * out_plane;
              for (std::size_t i = 0; i < out_plane; ++i) s += p[i];
              gb[oc] += s;
            }
          }
          if (!need_x && !need_w) continue;
          im2col(gyb, o, ho, wo, g, h, w, buf.data());
          ConstMatMap<T> dcols(buf.data(), okk, plane);
          if (need_x) {
            MatMap<T>(t.grad(xid).data() + static_cast<std::size_t>(b) * c * plane, c, plane).noalias() += wm * dcols;
          }
          if (need_w) {
            MatMap<T>(t.grad(wid).data(), c, okk).noalias() +=
                ConstMatMap<T>(X.data() + static_cast<std::size_t>(b) * c * plane, c, plane) * dcols.transpose();
          }
        }
      });
}

template <typename T>
Var<T> instance_norm(Var<T> x, Var<T> gamma, Var<T> beta, T eps) {
  const Tensor<T>& X = x.value();
  require_rank4(X.shape(), "instance_norm input");
  const int n = X.dim(0), c = X.dim(1);
  const std::size_t plane = static_cast<std::size_t>(X.dim(2)) * X.dim(3);
  if (gamma.value().numel() != static_cast<std::size_t>(c) || beta.value().numel() != static_cast<std::size_t>(c))
    throw ValidationError("instance_norm: affine parameters must have one entry per channel");

  Tensor<T> Y(X.shape());
  Tensor<T> xhat(X.shape());
  AlignedVector<T> inv_std(static_cast<std::size_t>(n) * c);
  const T* gm = gamma.value().data();
  const T* bt = beta.value().data();
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t off = (static_cast<std::size_t>(b) * c + ch) * plane;
      const T* xp = X.data() + off;
      double mean = 0.0;
      for (std::size_t i = 0; i < plane; ++i) mean += xp[i];
      mean /= static_cast<double>(plane);
      double var = 0.0;
      for (std::size_t i = 0; i < plane; ++i) var += (xp[i] - mean) * (xp[i] - mean);
      var /= static_cast<double>(plane);
      const T is = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
      inv_std[static_cast<std::size_t>(b) * c + ch] = is;
      T* hp = xhat.data() + off;
      T* yp = Y.data() + off;
      for (std::size_t i = 0; i < plane; ++i) {
        hp[i] = static_cast<T>((xp[i] - mean) * is);
        yp[i] = gm[ch] * hp[i] + bt[ch];
      }
    }
  }

  const std::size_t xid = x.id, gid = gamma.id, bid = beta.id;
  return x.tape->record("instance_norm", std::move(Y), {x, gamma, beta},
                        [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<T>& t, std::size_t self) {
                          const Tensor<T>& gy = t.grad(self);
                          const T* gm = t.value(gid).data();
                          const bool need_x = t.requires_grad(xid);
                          const bool need_g = t.requires_grad(gid);
                          const bool need_b = t.requires_grad(bid);
                          for (int b = 0; b < n; ++b) {
                            for (int ch = 0; ch < c; ++ch) {
                              const std::size_t off = (static_cast<std::size_t>(b) * c + ch) * plane;
                              const T* g = gy.data() + off;
                              const T* hp = xhat.data() + off;
                              double sum_g = 0.0, sum_gh = 0.0;
                              for (std::size_t i = 0; i < plane; ++i) {
                                sum_g += g[i];
                                sum_gh += static_cast<double>(g[i]) * hp[i];
                              }
                              if (need_g) t.grad(gid)[ch] += static_cast<T>(sum_gh);
                              if (need_b) t.grad(bid)[ch] += static_cast<T>(sum_g);
                              if (need_x) {
                                // dx = inv_std/N * (N*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
                                const double is = inv_std[static_cast<std::size_t>(b) * c + ch];
                                const double scale = gm[ch];
                                const double m_g = sum_g * scale / static_cast<double>(plane);
                                const double m_gh = sum_gh * scale / static_cast<double>(plane);
                                T* gx = t.grad(xid).data() + off;
                                for (std::size_t i = 0; i < plane; ++i)
                                  gx[i] += static_cast<T>(is * (g[i] * scale - m_g - hp[i] * m_gh));
                              }
                            }
                          }
                        });
}

template <typename T>
Var<T> leaky_relu(Var<T> x, T slope) {
  const Tensor<T>& X = x.value();
  Tensor<T> Y(X.shape());
  for (std::size_t i = 0; i < X.numel(); ++i) Y[i] = X[i] > T(0) ? X[i] : slope * X[i];
  const std::size_t xid = x.id;
  return x.tape->record("leaky_relu", std::move(Y), {x}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& X = t.value(xid);
    const Tensor<T>& gy = t.grad(self);
    Tensor<T>& gx = t.grad(xid);
    for (std::size_t i = 0; i < X.numel(); ++i) gx[i] += X[i] > T(0) ? gy[i] : slope * gy[i];
  });
}

template <typename T>
Var<T> tanh(Var<T> x) {
  const Tensor<T>& X = x.value();
  Tensor<T> Y(X.shape());
  for (std::size_t i = 0; i < X.numel(); ++i) Y[i] = std::tanh(X[i]);
  const std::size_t xid = x.id;
  return x.tape->record("tanh", std::move(Y), {x}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& Y = t.value(self);
    const Tensor<T>& gy = t.grad(self);
    Tensor<T>& gx = t.grad(xid);
    for (std::size_t i = 0; i < Y.numel(); ++i) gx[i] += gy[i] * (T(1) - Y[i] * Y[i]);
  });
}

template <typename T>
Var<T> dropout(Var<T> x, T p, Rng& rng) {
  if (!(p >= T(0)) || !(p < T(1))) throw ValidationError("dropout probability must lie in [0,1)");
  const Tensor<T>& X = x.value();
  Tensor<T> mask(X.shape());
  const T keep = T(1) / (T(1) - p);
  for (std::size_t i = 0; i < mask.numel(); ++i) mask[i] = rng.uniform() < static_cast<double>(p) ? T(0) : keep;
  Tensor<T> Y(X.shape());
  for (std::size_t i = 0; i < X.numel(); ++i) Y[i] = X[i] * mask[i];
  const std::size_t xid = x.id;
  return x.tape->record("dropout", std::move(Y), {x}, [=, mask = std::move(mask)](Tape<T>& t, std::size_t self) {
    const Tensor<T>& gy = t.grad(self);
    Tensor<T>& gx = t.grad(xid);
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] += gy[i] * mask[i];
  });
}

template <typename T>
Var<T> concat_channels(Var<T> a, Var<T> b) {
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  require_rank4(A.shape(), "concat_channels");
  require_rank4(B.shape(), "concat_channels");
  if (A.dim(0) != B.dim(0) || A.dim(2) != B.dim(2) || A.dim(3) != B.dim(3))
    throw ValidationError("concat_channels: cannot join " + shape_str(A.shape()) + " and " + shape_str(B.shape()));
  const int n = A.dim(0), ca = A.dim(1), cb = B.dim(1);
  const std::size_t plane = static_cast<std::size_t>(A.dim(2)) * A.dim(3);
  Tensor<T> Y({n, ca + cb, A.dim(2), A.dim(3)});
  for (int i = 0; i < n; ++i) {
    std::copy_n(A.data() + i * ca * plane, ca * plane, Y.data() + i * (ca + cb) * plane);
    std::copy_n(B.data() + i * cb * plane, cb * plane, Y.data() + (i * (ca + cb) + ca) * plane);
  }
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record("concat_channels", std::move(Y), {a, b}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& gy = t.grad(self);
    for (int i = 0; i < n; ++i) {
      if (t.requires_grad(aid)) {
        T* ga = t.grad(aid).data() + i * ca * plane;
        const T* src = gy.data() + i * (ca + cb) * plane;
        for (std::size_t k = 0; k < ca * plane; ++k) ga[k] += src[k];
      }
      if (t.requires_grad(bid)) {
        T* gb = t.grad(bid).data() + i * cb * plane;
        const T* src = gy.data() + (i * (ca + cb) + ca) * plane;
        for (std::size_t k = 0; k < cb * plane; ++k) gb[k] += src[k];
      }
    }
  });
}

template <typename T>
Var<T> affine(Var<T> x, T scale, T shift) {
  const Tensor<T>& X = x.value();
  Tensor<T> Y(X.shape());
  for (std::size_t i = 0; i < X.numel(); ++i) Y[i] = scale * X[i] + shift;
  const std::size_t xid = x.id;
  return x.tape->record("affine", std::move(Y), {x}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& gy = t.grad(self);
    Tensor<T>& gx = t.grad(xid);
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] += scale * gy[i];
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  if (A.shape() != B.shape())
    throw ValidationError("add: shape mismatch " + shape_str(A.shape()) + " vs " + shape_str(B.shape()));
  Tensor<T> Y(A.shape());
  for (std::size_t i = 0; i < A.numel(); ++i) Y[i] = A[i] + B[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record("add", std::move(Y), {a, b}, [=](Tape<T>& t, std::size_t self) {
    const Tensor<T>& gy = t.grad(self);
    if (t.requires_grad(aid)) t.grad(aid) += gy;
    if (t.requires_grad(bid)) t.grad(bid) += gy;
  });
}

template <typename T>
Var<T> mean(Var<T> x) {
  const Tensor<T>& X = x.value();
  if (X.numel() == 0) throw ValidationError("mean of empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < X.numel(); ++i) s += X[i];
  const std::size_t count = X.numel();
  const std::size_t xid = x.id;
  return x.tape->record("mean", Tensor<T>::scalar(static_cast<T>(s / count)), {x}, [=](Tape<T>& t, std::size_t self) {
    const T g = t.grad(self)[0] / static_cast<T>(count);
    Tensor<T>& gx = t.grad(xid);
    for (std::size_t i = 0; i < count; ++i) gx[i] += g;
  });
}

template <typename T>
Var<T> mean_abs_diff(Var<T> a, Var<T> b) {
  const Tensor<T>& A = a.value();
  const Tensor<T>& B = b.value();
  if (A.shape() != B.shape())
    throw ValidationError("l1: shape mismatch " + shape_str(A.shape()) + " vs " + shape_str(B.shape()));
  if (A.numel() == 0) throw ValidationError("l1 of empty tensors");
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i) s += std::abs(static_cast<double>(A[i]) - static_cast<double>(B[i]));
  const std::size_t count = A.numel();
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->record("mean_abs_diff", Tensor<T>::scalar(static_cast<T>(s / count)), {a, b},
                        [=](Tape<T>& t, std::size_t self) {
                          const T g = t.grad(self)[0] / static_cast<T>(count);
                          const Tensor<T>& A = t.value(aid);
                          const Tensor<T>& B = t.value(bid);
                          const bool need_a = t.requires_grad(aid);
                          const bool need_b = t.requires_grad(bid);
                          for (std::size_t i = 0; i < count; ++i) {
                            const T d = A[i] - B[i];
                            const T sg = d > T(0) ? g : (d < T(0) ? -g : T(0));
                            if (need_a) t.grad(aid)[i] += sg;
                            if (need_b) t.grad(bid)[i] -= sg;
                          }
                        });
}

template <typename T>
Var<T> mean_softplus(Var<T> x, T sign) {
  const Tensor<T>& X = x.value();
  if (X.numel() == 0) throw ValidationError("mean_softplus of empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < X.numel(); ++i) s += softplus(static_cast<double>(sign * X[i]));
  const std::size_t count = X.numel();
  const std::size_t xid = x.id;
  return x.tape->record("mean_softplus", Tensor<T>::scalar(static_cast<T>(s / count)), {x},
                        [=](Tape<T>& t, std::size_t self) {
                          const double g = t.grad(self)[0] / static_cast<double>(count);
                          const Tensor<T>& X = t.value(xid);
                          Tensor<T>& gx = t.grad(xid);
                          for (std::size_t i = 0; i < count; ++i) {
                            const double z = sign * X[i];
                            // d softplus(z)/dz = sigmoid(z)
                            const double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
                            gx[i] += static_cast<T>(g * sign * sig);
                          }
                        });
}

#define S2T_INSTANTIATE_OPS(T)                                                                      \
  template Var<T> conv2d(Var<T>, Var<T>, std::optional<Var<T>>, const ConvGeometry&);               \
  template Var<T> conv_transpose2d(Var<T>, Var<T>, std::optional<Var<T>>, const ConvGeometry&);     \
  template Var<T> instance_norm(Var<T>, Var<T>, Var<T>, T);                                         \
  template Var<T> leaky_relu(Var<T>, T);                                                            \
  template Var<T> tanh(Var<T>);                                                                     \
  template Var<T> dropout(Var<T>, T, Rng&);                                                         \
  template Var<T> concat_channels(Var<T>, Var<T>);                                                  \
  template Var<T> affine(Var<T>, T, T);                                                             \
  template Var<T> add(Var<T>, Var<T>);                                                              \
  template Var<T> mean(Var<T>);                                                                     \
  template Var<T> mean_abs_diff(Var<T>, Var<T>);                                                    \
  template Var<T> mean_softplus(Var<T>, T);

S2T_INSTANTIATE_OPS(float)
S2T_INSTANTIATE_OPS(double)

}  // namespace s2t::nn
