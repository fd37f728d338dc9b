#include "shapes2toon/toon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "shapes2toon/errors.hpp"
#include "shapes2toon/rng.hpp"

namespace s2t::toon {

using shape::EllipseGeom;
using shape::ShapeKind;
using shape::ShapeLayout;
using shape::ShapePrimitive;

namespace {

bool valid_color(const Rgb& c) {
  auto ok = [](float v) { return std::isfinite(v) && v >= 0.f && v <= 1.f; };
  return ok(c.r) && ok(c.g) && ok(c.b);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

// Nominal template geometry on the 256x256 canvas.
constexpr double kHeadX = 128.0;
constexpr double kHeadY = 146.0;
constexpr double kHeadR = 64.0;
constexpr double kEarAngleDeg = 45.0;
constexpr double kEarOverlap = 0.7;  // ear center distance = R + kEarOverlap * r_ear
constexpr double kFaceOffset = 0.55;
constexpr double kFaceRx = 0.62;
constexpr double kFaceRy = 0.34;
constexpr double kMuzzleOffset = 0.68;
constexpr double kMuzzleRx = 0.32;
constexpr double kMuzzleRy = 0.17;

}  // namespace

void ToonStyle::validate() const {
  for (const Rgb* c : {&head_fill, &ear_fill, &face_fill, &ink, &background})
    if (!valid_color(*c)) throw ValidationError("colors must be RGB in [0,1]^3", "style");
  if (eyes.count < 0) throw ValidationError("eye count must be >= 0", "style.eyes.count");
  if (!in_unit(eyes.rel_x) || !in_unit(eyes.rel_y) || !in_unit(eyes.relative_size))
    throw ValidationError("relative eye geometry must lie in [0,1]", "style.eyes");
  if (!(outline_width >= 0.0)) throw ValidationError("outline width must be >= 0", "style.outline_width");
}

ToonStyle ToonStyle::mouse() { return {}; }

ToonStyle ToonStyle::mouse_alt() {
  ToonStyle s;
  s.head_fill = {0.30f, 0.18f, 0.10f};
  s.ear_fill = {0.30f, 0.18f, 0.10f};
  s.face_fill = {0.96f, 0.90f, 0.78f};
  return s;
}

ShapeLayout sample_layout(std::uint64_t seed, LayoutTemplate tmpl, const TemplateJitter& jitter) {
  if (tmpl != LayoutTemplate::mouse_face) throw ValidationError("unknown layout template");
  Rng rng(seed);
  const double pos = jitter.position * kHeadR;
  auto shift = [&] { return rng.uniform(-pos, pos); };
  auto scale = [&] { return 1.0 + rng.uniform(-jitter.radius, jitter.radius); };

  ShapeLayout layout;
  layout.canvas_w = kTemplateCanvas;
  layout.canvas_h = kTemplateCanvas;

  const double head_r = kHeadR * scale();
  const double hx = kHeadX + shift();
  const double hy = kHeadY + shift();
  layout.shapes.push_back(ShapePrimitive::circle(hx, hy, head_r));

  for (int side : {-1, 1}) {
    const double ear_r = kEarRatio * kHeadR * scale();
    const double dist = head_r + kEarOverlap * ear_r;
    const double a = kEarAngleDeg * std::numbers::pi / 180.0;
    layout.shapes.push_back(
        ShapePrimitive::circle(hx + side * dist * std::sin(a) + shift(), hy - dist * std::cos(a) + shift(), ear_r));
  }

  layout.shapes.push_back(ShapePrimitive::oval(hx + shift(), hy + kFaceOffset * head_r + shift(),
                                               kFaceRx * head_r * scale(), kFaceRy * head_r * scale()));
  layout.shapes.push_back(ShapePrimitive::oval(hx + shift() * 0.5, hy + kMuzzleOffset * head_r + shift() * 0.5,
                                               kMuzzleRx * head_r * scale(), kMuzzleRy * head_r * scale()));
  return layout;
}

FaceRoles identify_roles(const ShapeLayout& layout) {
  FaceRoles roles;
  std::optional<std::size_t> head;
  for (std::size_t i = 0; i < layout.shapes.size(); ++i) {
    const auto& s = layout.shapes[i];
    if (s.kind == ShapeKind::circle) {
      if (!head || s.rx > layout.shapes[*head].rx) head = i;
    } else if (!roles.face || s.rx * s.ry > layout.shapes[*roles.face].rx * layout.shapes[*roles.face].ry) {
      roles.face = i;
    }
  }
  if (!head) throw ValidationError("layout has no head circle", "shapes");
  roles.head = *head;
  for (std::size_t i = 0; i < layout.shapes.size(); ++i) {
    if (i == roles.head || (roles.face && i == *roles.face)) continue;
    (layout.shapes[i].kind == ShapeKind::circle ? roles.ears : roles.muzzles).push_back(i);
  }
  return roles;
}

RasterImage render_toon(const ShapeLayout& layout, const ToonStyle& style, int w, int h) {
  layout.validate(/*require_shapes=*/true);
  style.validate();
  const FaceRoles roles = identify_roles(layout);
  RasterImage img(w, h, 3);
  img.fill(style.background);

  const double line = style.outline_width * std::sqrt(static_cast<double>(w) / layout.canvas_w *
                                                      static_cast<double>(h) / layout.canvas_h);
  auto geom = [&](std::size_t i) { return shape::to_pixels(layout.shapes[i], layout.canvas_w, layout.canvas_h, w, h); };
  auto solid = [&](const EllipseGeom& e, const Rgb& fill) {
    shape::fill_ellipse(img, e, fill);
    if (line > 0.0) shape::stroke_ellipse(img, e, line, style.ink);
  };

  for (std::size_t i : roles.ears) solid(geom(i), style.ear_fill);
  const EllipseGeom head = geom(roles.head);
  solid(head, style.head_fill);

  // Without a face oval the face sits in the lower half of the head.
  EllipseGeom face = roles.face ? geom(*roles.face)
                                : EllipseGeom{head.cx, head.cy + 0.55 * head.ry, 0.62 * head.rx, 0.34 * head.ry, 0.0};
  solid(face, style.face_fill);

  // Eyes and nose live in the face's local frame.
  const double ft = face.rotation_deg * std::numbers::pi / 180.0;
  auto face_point = [&](double rel_x, double rel_y) {
    const double u = (2.0 * rel_x - 1.0) * face.rx;
    const double v = (2.0 * rel_y - 1.0) * face.ry;
    return std::pair{face.cx + u * std::cos(ft) - v * std::sin(ft), face.cy + u * std::sin(ft) + v * std::cos(ft)};
  };
  const int eyes = style.eyes.count;
  for (int k = 0; k < eyes; ++k) {
    const double rel_x =
        eyes == 1 ? 0.5 : style.eyes.rel_x + (1.0 - 2.0 * style.eyes.rel_x) * k / static_cast<double>(eyes - 1);
    const auto [ex, ey] = face_point(rel_x, style.eyes.rel_y);
    const double ery = style.eyes.relative_size * face.ry;
    shape::fill_ellipse(img, {ex, ey, 0.45 * ery, ery, face.rotation_deg}, style.ink);
  }

  for (std::size_t i : roles.muzzles) {
    const EllipseGeom m = geom(i);
    solid(m, style.face_fill);
    const double mt = m.rotation_deg * std::numbers::pi / 180.0;
    const double nose_v = -0.45 * m.ry;
    shape::fill_ellipse(img, {m.cx - nose_v * std::sin(mt), m.cy + nose_v * std::cos(mt), 0.28 * m.rx, 0.30 * m.ry,
                              m.rotation_deg},
                        style.ink);
    if (line > 0.0)
      shape::stroke_arc(img, {m.cx, m.cy, 0.62 * m.rx, 0.55 * m.ry, m.rotation_deg}, line, 25.0, 155.0, style.ink);
  }
  img.clamp();
  return img;
}

corpus::PairedSample make_pair(const ShapeLayout& layout, const ToonStyle& style, int image_size) {
  corpus::PairedSample p;
  p.source = shape::rasterize(layout, image_size, image_size, 3);
  p.target = render_toon(layout, style, image_size, image_size);
  return p;
}

namespace {

std::string base_id_for(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", i);
  return buf;
}

}  // namespace

corpus::CorpusManifest build_corpus(int n_base, std::uint64_t seed, const std::filesystem::path& out_dir,
                                    const CorpusOptions& options) {
  if (n_base < 1) throw ValidationError("n_base must be >= 1", "n_base");
  if (options.styles.empty()) throw ValidationError("at least one style required", "styles");
  if (options.image_size < 8) throw ValidationError("image size too small", "image_size");
  corpus::prepare_directory(out_dir);

  corpus::CorpusManifest manifest;
  manifest.kind = "base";
  manifest.image_size = options.image_size;
  manifest.seed = seed;
  manifest.entries.resize(static_cast<std::size_t>(n_base));

  for (int i = 0; i < n_base; ++i) {
    const std::uint64_t sample_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const ShapeLayout layout = sample_layout(sample_seed, LayoutTemplate::mouse_face, options.jitter);
    const ToonStyle& style = options.styles[options.styles.size() == 1 ? 0 : sample_seed % options.styles.size()];
    const auto pair = make_pair(layout, style, options.image_size);
    const auto png = encode_png(pair.joined());
    const std::string id = base_id_for(i);
    write_file(corpus::pair_path(out_dir, id), png);
    write_text(corpus::layout_path(out_dir, id), shape::serialize_layout(layout) + "\n");
    manifest.entries[static_cast<std::size_t>(i)] = {id, id, sample_seed, sha256_hex(png), std::nullopt};
  }
  manifest.save(out_dir);
  return manifest;
}

}  // namespace s2t::toon
