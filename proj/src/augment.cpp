#include "shapes2toon/augment.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "shapes2toon/errors.hpp"
#include "shapes2toon/rng.hpp"

namespace s2t::augment {

namespace fs = std::filesystem;
using shape::AffineTransform;

void AugmentationPlan::validate() const {
  if (per_base < 1) throw ValidationError("per_base must be >= 1", "plan.per_base");
  if (ranges.max_rotate_deg < 0.0) throw ValidationError("must be >= 0", "plan.ranges.max_rotate_deg");
  if (!(ranges.min_scale > 0.0) || ranges.max_scale < ranges.min_scale)
    throw ValidationError("need 0 < min_scale <= max_scale", "plan.ranges.min_scale");
  if (ranges.max_translate < 0.0) throw ValidationError("must be >= 0", "plan.ranges.max_translate");
}

RasterImage warp_image(const RasterImage& img, const AffineTransform& t, const Rgb& background) {
  t.validate();
  if (t.is_identity()) return img;
  const int w = img.width();
  const int h = img.height();
  const double theta = shape::normalize_degrees(t.rotate_deg) * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double f = t.flip_h ? -1.0 : 1.0;
  const double ox = w / 2.0;
  const double oy = h / 2.0;
  const float bg[3] = {background.r, background.g, background.b};
  const float bg_gray = (bg[0] + bg[1] + bg[2]) / 3.f;
  const int ch = img.channels();

  auto sample = [&](int x, int y, int k) -> float {
    if (x < 0 || y < 0 || x >= w || y >= h) return ch == 1 ? bg_gray : bg[k];
    return img.at(x, y, k);
  };

  RasterImage out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse map: q = F^-1 R^-1 (p - c - d) / s + c, at pixel centers.
      const double px = x + 0.5 - ox - t.dx;
      const double py = y + 0.5 - oy - t.dy;
      const double rx = (c * px + s * py) / t.scale;
      const double ry = (-s * px + c * py) / t.scale;
      const double qx = f * rx + ox - 0.5;
      const double qy = ry + oy - 0.5;
      const double fx = std::floor(qx);
      const double fy = std::floor(qy);
      const double tx = qx - fx;
      const double ty = qy - fy;
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      for (int k = 0; k < ch; ++k) {
        const double top = sample(x0, y0, k) * (1 - tx) + sample(x0 + 1, y0, k) * tx;
        const double bot = sample(x0, y0 + 1, k) * (1 - tx) + sample(x0 + 1, y0 + 1, k) * tx;
        out.at(x, y, k) = static_cast<float>(top * (1 - ty) + bot * ty);
      }
    }
  }
  out.clamp();
  return out;
}

corpus::PairedSample augment_pair(const corpus::PairedSample& p, const AffineTransform& t) {
  t.validate();
  if (p.source.width() != p.target.width() || p.source.height() != p.target.height())
    throw ValidationError("pair halves differ in size");
  corpus::PairedSample out;
  out.source = warp_image(p.source, t);
  out.target = warp_image(p.target, t);
  out.id = p.id;
  out.base_id = p.base_id.empty() ? p.id : p.base_id;
  out.transform = p.transform ? shape::compose(t, *p.transform) : t;
  return out;
}

AffineTransform sample_transform(const AugmentationPlan& plan, int image_size, std::size_t base_index, int variant) {
  if (variant == 0) return {};
  Rng rng(derive_seed(plan.rng_seed, base_index, static_cast<std::uint64_t>(variant)));
  const auto& r = plan.ranges;
  AffineTransform t;
  t.rotate_deg = shape::normalize_degrees(rng.uniform(-r.max_rotate_deg, r.max_rotate_deg));
  t.scale = rng.uniform(r.min_scale, r.max_scale);
  const double shift = r.max_translate * image_size;
  t.dx = rng.uniform(-shift, shift);
  t.dy = rng.uniform(-shift, shift);
  t.flip_h = r.allow_flip && rng.bernoulli(0.5);
  return t;
}

corpus::CorpusManifest expand_corpus(const fs::path& base_dir, const corpus::CorpusManifest& manifest,
                                     const AugmentationPlan& plan, const fs::path& out_dir) {
  plan.validate();
  corpus::prepare_directory(out_dir);

  corpus::CorpusManifest out;
  out.kind = "augmented";
  out.image_size = manifest.image_size;
  out.seed = plan.rng_seed;
  out.entries.reserve(manifest.size() * static_cast<std::size_t>(plan.per_base));

  for (std::size_t b = 0; b < manifest.size(); ++b) {
    const auto& base = manifest.entries[b];
    const auto base_png = read_file(corpus::pair_path(base_dir, base.id));
    const corpus::PairedSample pair = corpus::PairedSample::from_joined(decode_png(base_png));
    std::optional<shape::ShapeLayout> layout;
    if (fs::exists(corpus::layout_path(base_dir, base.id)))
      layout = shape::parse_layout(read_text(corpus::layout_path(base_dir, base.id)));

    for (int v = 0; v < plan.per_base; ++v) {
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_%02d", v);
      const std::string id = base.id + suffix;
      const AffineTransform t = sample_transform(plan, pair.source.width(), b, v);
      std::vector<std::uint8_t> png;
      if (v == 0) {
        png = base_png;
      } else {
        png = encode_png(augment_pair(pair, t).joined());
      }
      write_file(corpus::pair_path(out_dir, id), png);
      if (layout) {
        // Pixel offsets become canvas offsets for the vector layout.
        AffineTransform lt = t;
        lt.dx = t.dx * layout->canvas_w / pair.source.width();
        lt.dy = t.dy * layout->canvas_h / pair.source.height();
        write_text(corpus::layout_path(out_dir, id), shape::serialize_layout(shape::transform_layout(*layout, lt)) + "\n");
      }
      out.entries.push_back({id, base.base_id.empty() ? base.id : base.base_id,
                             derive_seed(plan.rng_seed, b, static_cast<std::uint64_t>(v)), sha256_hex(png), t});
    }
  }
  out.save(out_dir);
  return out;
}

}  // namespace s2t::augment
