#include "shapes2toon/nn/tensor.hpp"

#include <algorithm>

namespace s2t::nn {

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T> image_to_tensor(const RasterImage& img) {
  return images_to_batch<T>(std::span(&img, 1));
}

template <typename T>
Tensor<T> images_to_batch(std::span<const RasterImage> images) {
  if (images.empty()) throw ValidationError("empty image batch");
  const int w = images[0].width(), h = images[0].height(), c = images[0].channels();
  Tensor<T> t({static_cast<int>(images.size()), c, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const auto& img = images[n];
    if (img.width() != w || img.height() != h || img.channels() != c)
      throw ValidationError("images in a batch must share dimensions");
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) t.at(static_cast<int>(n), ch, y, x) = static_cast<T>(img.at(x, y, ch));
  }
  return t;
}

template <typename T>
RasterImage tensor_to_image(const Tensor<T>& t, int n) {
  if (t.rank() != 4 || (t.dim(1) != 1 && t.dim(1) != 3))
    throw ValidationError("tensor_to_image: expected [N,1|3,H,W], got " + shape_str(t.shape()));
  const int c = t.dim(1), h = t.dim(2), w = t.dim(3);
  RasterImage img(w, h, c);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(x, y, ch) = static_cast<float>(t.at(n, ch, y, x));
  img.clamp();
  return img;
}

template Tensor<float> image_to_tensor<float>(const RasterImage&);
template Tensor<double> image_to_tensor<double>(const RasterImage&);
template Tensor<float> images_to_batch<float>(std::span<const RasterImage>);
template Tensor<double> images_to_batch<double>(std::span<const RasterImage>);
template RasterImage tensor_to_image<float>(const Tensor<float>&, int);
template RasterImage tensor_to_image<double>(const Tensor<double>&, int);

}  // namespace s2t::nn
