#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapes2toon/image.hpp"

namespace s2t::shape {

enum class ShapeKind { circle, oval };

std::string_view to_string(ShapeKind kind);

inline constexpr double kDefaultStrokeWidth = 2.0;

// A circle or oval in canvas pixels (origin top-left, y down).
// rotation_deg turns the rx axis clockwise on screen.
struct ShapePrimitive {
  ShapeKind kind = ShapeKind::circle;
  double cx = 0.0;
  double cy = 0.0;
  double rx = 1.0;
  double ry = 1.0;
  double rotation_deg = 0.0;
  double stroke_width = kDefaultStrokeWidth;
  bool fill = false;

  static ShapePrimitive circle(double cx, double cy, double r, double stroke_width = kDefaultStrokeWidth);
  static ShapePrimitive oval(double cx, double cy, double rx, double ry, double rotation_deg = 0.0,
                             double stroke_width = kDefaultStrokeWidth);

  // Throws ValidationError naming `path` when an invariant fails.
  void validate(const std::string& path = "shape") const;

  // Half extents of the rotated bounding box.
  double half_width() const;
  double half_height() const;

  bool operator==(const ShapePrimitive&) const = default;
};

struct ShapeLayout {
  int canvas_w = 256;
  int canvas_h = 256;
  std::vector<ShapePrimitive> shapes;

  // Empty layouts are allowed for editing; rasterize/inference call with
  // require_shapes = true.
  void validate(bool require_shapes = true) const;

  bool operator==(const ShapeLayout&) const = default;
};

// Layout document: {"canvas":{"w","h"},"shapes":[{kind,cx,cy,rx,ry,rotation_deg,stroke_width,fill}]}.
// Unknown fields are rejected; rotation_deg, stroke_width and fill are optional
// (0, 2, false); a circle may omit ry.
ShapeLayout parse_layout(std::string_view text);
ShapeLayout layout_from_json(const nlohmann::json& doc);
nlohmann::json layout_to_json(const ShapeLayout& layout);

// Canonical text form: every field present, keys sorted, shortest
// round-trip number formatting.
std::string serialize_layout(const ShapeLayout& layout);

double normalize_degrees(double deg);

// Similarity transform about the canvas center:
//   p' = c + scale * R(rotate_deg) * F * (p - c) + (dx, dy)
// where F mirrors x when flip_h is set.
struct AffineTransform {
  double rotate_deg = 0.0;
  double scale = 1.0;
  double dx = 0.0;
  double dy = 0.0;
  bool flip_h = false;

  bool is_identity() const;
  void validate() const;

  bool operator==(const AffineTransform&) const = default;
};

// Returns the transform equivalent to applying `first` then `second`.
AffineTransform compose(const AffineTransform& second, const AffineTransform& first);

nlohmann::json transform_to_json(const AffineTransform& t);
AffineTransform transform_from_json(const nlohmann::json& j);

ShapeLayout transform_layout(const ShapeLayout& layout, const AffineTransform& t);

// Dark anti-aliased strokes on white, drawn in list order, scaled from the
// layout canvas to w x h.
RasterImage rasterize(const ShapeLayout& layout, int w, int h, int channels = 3);

// --- drawing primitives shared with the toon renderer ------------------------

// An ellipse in output pixel coordinates.
struct EllipseGeom {
  double cx = 0.0;
  double cy = 0.0;
  double rx = 1.0;
  double ry = 1.0;
  double rotation_deg = 0.0;
};

// Maps a primitive from canvas space into an image of size w x h.
EllipseGeom to_pixels(const ShapePrimitive& s, int canvas_w, int canvas_h, int w, int h);

// Approximate signed distance (pixels) from (x, y) to the ellipse boundary,
// negative inside.
double signed_distance(const EllipseGeom& e, double x, double y);

// Alpha-composites a filled ellipse with anti-aliased edges.
void fill_ellipse(RasterImage& img, const EllipseGeom& e, const Rgb& color, double alpha = 1.0);
// Alpha-composites an anti-aliased outline of the given width.
void stroke_ellipse(RasterImage& img, const EllipseGeom& e, double width, const Rgb& color, double alpha = 1.0);
// Stroke restricted to the arc where the local angle (degrees, 0 = +rx axis,
// clockwise) lies in [from_deg, to_deg].
void stroke_arc(RasterImage& img, const EllipseGeom& e, double width, double from_deg, double to_deg,
                const Rgb& color);

}  // namespace s2t::shape
