#include "shapes2toon/shape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "shapes2toon/errors.hpp"

namespace s2t::shape {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::string_view to_string(ShapeKind kind) { return kind == ShapeKind::circle ? "circle" : "oval"; }

double normalize_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

ShapePrimitive ShapePrimitive::circle(double cx, double cy, double r, double stroke_width) {
  return {ShapeKind::circle, cx, cy, r, r, 0.0, stroke_width, false};
}

ShapePrimitive ShapePrimitive::oval(double cx, double cy, double rx, double ry, double rotation_deg,
                                    double stroke_width) {
  return {ShapeKind::oval, cx, cy, rx, ry, normalize_degrees(rotation_deg), stroke_width, false};
}

void ShapePrimitive::validate(const std::string& path) const {
  if (!finite(cx)) throw ValidationError("must be finite", path + ".cx");
  if (!finite(cy)) throw ValidationError("must be finite", path + ".cy");
  if (!finite(rx) || rx <= 0.0) throw ValidationError("must be > 0", path + ".rx");
  if (!finite(ry) || ry <= 0.0) throw ValidationError("must be > 0", path + ".ry");
  if (!finite(rotation_deg) || rotation_deg < 0.0 || rotation_deg >= 360.0)
    throw ValidationError("must lie in [0, 360)", path + ".rotation_deg");
  if (!finite(stroke_width) || stroke_width <= 0.0) throw ValidationError("must be > 0", path + ".stroke_width");
  if (kind == ShapeKind::circle && rx != ry) throw ValidationError("circle requires rx == ry", path + ".ry");
}

double ShapePrimitive::half_width() const {
  const double c = std::cos(rotation_deg * kDegToRad);
  const double s = std::sin(rotation_deg * kDegToRad);
  return std::sqrt(rx * rx * c * c + ry * ry * s * s);
}

double ShapePrimitive::half_height() const {
  const double c = std::cos(rotation_deg * kDegToRad);
  const double s = std::sin(rotation_deg * kDegToRad);
  return std::sqrt(rx * rx * s * s + ry * ry * c * c);
}

void ShapeLayout::validate(bool require_shapes) const {
  if (canvas_w <= 0) throw ValidationError("must be a positive integer", "canvas.w");
  if (canvas_h <= 0) throw ValidationError("must be a positive integer", "canvas.h");
  if (require_shapes && shapes.empty()) throw ValidationError("layout needs at least one shape", "shapes");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const std::string path = "shapes[" + std::to_string(i) + "]";
    const auto& s = shapes[i];
    s.validate(path);
    const double hw = s.half_width();
    const double hh = s.half_height();
    if (s.cx + hw <= 0.0 || s.cx - hw >= canvas_w || s.cy + hh <= 0.0 || s.cy - hh >= canvas_h)
      throw ValidationError("shape lies entirely outside the canvas", path);
  }
}

// --- document I/O -----------------------------------------------------------

namespace {

double require_number(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing required field", path + "." + key);
  if (!it->is_number()) throw ParseError("must be a number", path + "." + key);
  return it->get<double>();
}

double optional_number(const json& obj, const char* key, const std::string& path, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ParseError("must be a number", path + "." + key);
  return it->get<double>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ParseError("unknown field", path.empty() ? key : path + "." + key);
}

int require_positive_int(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing required field", path + "." + key);
  if (!it->is_number_integer()) throw ParseError("must be an integer", path + "." + key);
  const auto v = it->get<std::int64_t>();
  if (v <= 0 || v > 1 << 20) throw ValidationError("must be a positive integer", path + "." + key);
  return static_cast<int>(v);
}

}  // namespace

ShapeLayout layout_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("layout document must be a JSON object", "$");
  reject_unknown(doc, {"canvas", "shapes"}, "");
  const auto canvas = doc.find("canvas");
  if (canvas == doc.end()) throw ParseError("missing required field", "canvas");
  if (!canvas->is_object()) throw ParseError("must be an object", "canvas");
  reject_unknown(*canvas, {"w", "h"}, "canvas");

  ShapeLayout layout;
  layout.canvas_w = require_positive_int(*canvas, "w", "canvas");
  layout.canvas_h = require_positive_int(*canvas, "h", "canvas");

  const auto shapes = doc.find("shapes");
  if (shapes == doc.end()) throw ParseError("missing required field", "shapes");
  if (!shapes->is_array()) throw ParseError("must be an array", "shapes");
  for (std::size_t i = 0; i < shapes->size(); ++i) {
    const std::string path = "shapes[" + std::to_string(i) + "]";
    const json& s = (*shapes)[i];
    if (!s.is_object()) throw ParseError("must be an object", path);
    reject_unknown(s, {"kind", "cx", "cy", "rx", "ry", "rotation_deg", "stroke_width", "fill"}, path);
    ShapePrimitive p;
    const auto kind = s.find("kind");
    if (kind == s.end()) throw ParseError("missing required field", path + ".kind");
    if (!kind->is_string()) throw ParseError("must be \"circle\" or \"oval\"", path + ".kind");
    const auto kind_name = kind->get<std::string>();
    if (kind_name == "circle") {
      p.kind = ShapeKind::circle;
    } else if (kind_name == "oval") {
      p.kind = ShapeKind::oval;
    } else {
      throw ParseError("must be \"circle\" or \"oval\"", path + ".kind");
    }
    p.cx = require_number(s, "cx", path);
    p.cy = require_number(s, "cy", path);
    p.rx = require_number(s, "rx", path);
    p.ry = (p.kind == ShapeKind::circle) ? optional_number(s, "ry", path, p.rx) : require_number(s, "ry", path);
    const double rot = optional_number(s, "rotation_deg", path, 0.0);
    if (!finite(rot)) throw ValidationError("must be finite", path + ".rotation_deg");
    p.rotation_deg = normalize_degrees(rot);
    p.stroke_width = optional_number(s, "stroke_width", path, kDefaultStrokeWidth);
    if (const auto fill = s.find("fill"); fill != s.end()) {
      if (!fill->is_boolean()) throw ParseError("must be a boolean", path + ".fill");
      p.fill = fill->get<bool>();
    }
    layout.shapes.push_back(p);
  }
  layout.validate(/*require_shapes=*/false);
  return layout;
}

ShapeLayout parse_layout(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), "$");
  }
  return layout_from_json(doc);
}

json layout_to_json(const ShapeLayout& layout) {
  json shapes = json::array();
  for (const auto& s : layout.shapes) {
    shapes.push_back({{"kind", std::string(to_string(s.kind))},
                      {"cx", s.cx},
                      {"cy", s.cy},
                      {"rx", s.rx},
                      {"ry", s.ry},
                      {"rotation_deg", s.rotation_deg},
                      {"stroke_width", s.stroke_width},
                      {"fill", s.fill}});
  }
  return {{"canvas", {{"w", layout.canvas_w}, {"h", layout.canvas_h}}}, {"shapes", std::move(shapes)}};
}

std::string serialize_layout(const ShapeLayout& layout) { return layout_to_json(layout).dump(); }

// --- transforms -------------------------------------------------------------

bool AffineTransform::is_identity() const {
  return normalize_degrees(rotate_deg) == 0.0 && scale == 1.0 && dx == 0.0 && dy == 0.0 && !flip_h;
}

void AffineTransform::validate() const {
  if (!finite(scale) || scale <= 0.0) throw ValidationError("scale must be > 0", "transform.scale");
  if (!finite(rotate_deg)) throw ValidationError("must be finite", "transform.rotate_deg");
  if (!finite(dx) || !finite(dy)) throw ValidationError("translation must be finite", "transform.dx");
}

AffineTransform compose(const AffineTransform& second, const AffineTransform& first) {
  AffineTransform out;
  const double theta1 = second.flip_h ? -first.rotate_deg : first.rotate_deg;
  out.rotate_deg = normalize_degrees(second.rotate_deg + theta1);
  out.scale = second.scale * first.scale;
  out.flip_h = second.flip_h != first.flip_h;
  // d = A2 * d1 + d2
  const double t = normalize_degrees(second.rotate_deg) * kDegToRad;
  const double fx = second.flip_h ? -first.dx : first.dx;
  out.dx = second.scale * (std::cos(t) * fx - std::sin(t) * first.dy) + second.dx;
  out.dy = second.scale * (std::sin(t) * fx + std::cos(t) * first.dy) + second.dy;
  return out;
}

json transform_to_json(const AffineTransform& t) {
  return {{"rotate_deg", t.rotate_deg}, {"scale", t.scale}, {"flip_h", t.flip_h}, {"dx", t.dx}, {"dy", t.dy}};
}

AffineTransform transform_from_json(const json& j) {
  AffineTransform t;
  t.rotate_deg = j.value("rotate_deg", 0.0);
  t.scale = j.value("scale", 1.0);
  t.flip_h = j.value("flip_h", false);
  t.dx = j.value("dx", 0.0);
  t.dy = j.value("dy", 0.0);
  t.validate();
  return t;
}

ShapeLayout transform_layout(const ShapeLayout& layout, const AffineTransform& t) {
  t.validate();
  const double theta = normalize_degrees(t.rotate_deg);
  const double c = std::cos(theta * kDegToRad);
  const double s = std::sin(theta * kDegToRad);
  const double f = t.flip_h ? -1.0 : 1.0;
  // (A - I) with A = scale * R * F; exact zero for the identity.
  const double m00 = t.scale * c * f - 1.0;
  const double m01 = -t.scale * s;
  const double m10 = t.scale * s * f;
  const double m11 = t.scale * c - 1.0;
  const double ox = layout.canvas_w / 2.0;
  const double oy = layout.canvas_h / 2.0;

  ShapeLayout out = layout;
  for (auto& p : out.shapes) {
    const double px = p.cx - ox;
    const double py = p.cy - oy;
    p.cx = p.cx + (m00 * px + m01 * py) + t.dx;
    p.cy = p.cy + (m10 * px + m11 * py) + t.dy;
    p.rx *= t.scale;
    p.ry *= t.scale;
    if (p.kind == ShapeKind::circle) {
      p.rotation_deg = 0.0;
    } else {
      p.rotation_deg = normalize_degrees((t.flip_h ? -p.rotation_deg : p.rotation_deg) + theta);
    }
  }
  return out;
}

// --- drawing ----------------------------------------------------------------

EllipseGeom to_pixels(const ShapePrimitive& s, int canvas_w, int canvas_h, int w, int h) {
  const double sx = static_cast<double>(w) / canvas_w;
  const double sy = static_cast<double>(h) / canvas_h;
  if (sx == sy) {
    return {s.cx * sx, s.cy * sy, s.rx * sx, s.ry * sx, s.rotation_deg};
  }
  // Non-uniform scale: the image of the ellipse is S * R * diag(rx, ry) applied
  // to the unit circle; read its axes off the closed-form 2x2 SVD.
  const double t = s.rotation_deg * kDegToRad;
  const double a = sx * std::cos(t) * s.rx;
  const double b = -sx * std::sin(t) * s.ry;
  const double c = sy * std::sin(t) * s.rx;
  const double d = sy * std::cos(t) * s.ry;
  const double e = (a + d) / 2;
  const double f = (a - d) / 2;
  const double g = (c + b) / 2;
  const double hh = (c - b) / 2;
  const double q = std::hypot(e, hh);
  const double r = std::hypot(f, g);
  const double a1 = std::atan2(g, f);
  const double a2 = std::atan2(hh, e);
  const double beta = (a2 + a1) / 2;
  return {s.cx * sx, s.cy * sy, q + r, std::abs(q - r), normalize_degrees(beta / kDegToRad)};
}

double signed_distance(const EllipseGeom& e, double x, double y) {
  const double t = e.rotation_deg * kDegToRad;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const double px = x - e.cx;
  const double py = y - e.cy;
  // Local coordinates: rotate by -t.
  const double u = c * px + s * py;
  const double v = -s * px + c * py;
  const double rho = std::hypot(u / e.rx, v / e.ry);
  if (rho < 1e-12) return -std::min(e.rx, e.ry);
  const double gu = u / (e.rx * e.rx * rho);
  const double gv = v / (e.ry * e.ry * rho);
  return (rho - 1.0) / std::hypot(gu, gv);
}

namespace {

template <typename Coverage>
void paint(RasterImage& img, const EllipseGeom& e, double margin, const Rgb& color, double alpha, Coverage coverage) {
  const double t = e.rotation_deg * kDegToRad;
  const double hw = std::sqrt(e.rx * e.rx * std::cos(t) * std::cos(t) + e.ry * e.ry * std::sin(t) * std::sin(t));
  const double hh = std::sqrt(e.rx * e.rx * std::sin(t) * std::sin(t) + e.ry * e.ry * std::cos(t) * std::cos(t));
  const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - hw - margin)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(e.cx + hw + margin)));
  const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - hh - margin)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(e.cy + hh + margin)));
  const float col[3] = {color.r, color.g, color.b};
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double cov = coverage(x + 0.5, y + 0.5) * alpha;
      if (cov <= 0.0) continue;
      const auto a = static_cast<float>(std::min(cov, 1.0));
      if (img.channels() == 1) {
        const float gray = (col[0] + col[1] + col[2]) / 3.f;
        img.at(x, y) = img.at(x, y) * (1.f - a) + gray * a;
      } else {
        for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = img.at(x, y, ch) * (1.f - a) + col[ch] * a;
      }
    }
  }
}

}  // namespace

void fill_ellipse(RasterImage& img, const EllipseGeom& e, const Rgb& color, double alpha) {
  paint(img, e, 2.0, color, alpha,
        [&](double x, double y) { return std::clamp(0.5 - signed_distance(e, x, y), 0.0, 1.0); });
}

void stroke_ellipse(RasterImage& img, const EllipseGeom& e, double width, const Rgb& color, double alpha) {
  const double half = width / 2.0;
  paint(img, e, half + 2.0, color, alpha,
        [&](double x, double y) { return std::clamp(half + 0.5 - std::abs(signed_distance(e, x, y)), 0.0, 1.0); });
}

void stroke_arc(RasterImage& img, const EllipseGeom& e, double width, double from_deg, double to_deg,
                const Rgb& color) {
  const double half = width / 2.0;
  const double t = e.rotation_deg * kDegToRad;
  const double c = std::cos(t);
  const double s = std::sin(t);
  paint(img, e, half + 2.0, color, 1.0, [&](double x, double y) {
    const double px = x - e.cx;
    const double py = y - e.cy;
    const double u = c * px + s * py;
    const double v = -s * px + c * py;
    const double ang = normalize_degrees(std::atan2(v / e.ry, u / e.rx) / kDegToRad);
    if (ang < from_deg || ang > to_deg) return 0.0;
    return std::clamp(half + 0.5 - std::abs(signed_distance(e, x, y)), 0.0, 1.0);
  });
}

RasterImage rasterize(const ShapeLayout& layout, int w, int h, int channels) {
  if (w <= 0 || h <= 0) throw ValidationError("raster size must be positive");
  layout.validate(/*require_shapes=*/true);
  RasterImage img(w, h, channels, 1.f);
  const double stroke_scale =
      std::sqrt(static_cast<double>(w) / layout.canvas_w * static_cast<double>(h) / layout.canvas_h);
  const Rgb ink{0.f, 0.f, 0.f};
  for (const auto& s : layout.shapes) {
    const EllipseGeom e = to_pixels(s, layout.canvas_w, layout.canvas_h, w, h);
    if (s.fill) fill_ellipse(img, e, ink);
    stroke_ellipse(img, e, s.stroke_width * stroke_scale, ink);
  }
  return img;
}

}  // namespace s2t::shape
