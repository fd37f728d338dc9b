#pragma once

#include <string>
#include <vector>

#include "shapes2toon/image.hpp"
#include "shapes2toon/shape.hpp"

namespace s2t::fit {

struct HoughConfig {
  double r_min = 8.0;
  double r_max = 96.0;
  double bin = 1.0;             // accumulator resolution, pixels per bin
  double threshold = 0.3;       // fraction of ideal perimeter votes, (0,1]
  double nms_radius = 6.0;      // pixels, in (cx, cy, r) space
  double edge_threshold = 0.2;  // Sobel magnitude, 1.0 = unit step edge
  int max_results = 32;

  void validate() const;
};

struct EdgePoint {
  int x = 0;
  int y = 0;
  double gx = 0.0;  // unit gradient direction
  double gy = 0.0;
  double magnitude = 0.0;
};

struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<EdgePoint> points;
};

// Sobel gradient, thresholded and thinned along the gradient direction.
EdgeMap extract_edges(const RasterImage& img, double threshold);

// Votes of the circle transform. Each edge point votes at pixel center
// +/- r * gradient for every radius r_k = r_min + k * bin; cells are
// floor(coord / bin).
struct CircleAccumulator {
  int nx = 0;
  int ny = 0;
  int nr = 0;
  double r_min = 0.0;
  double bin = 1.0;
  std::vector<int> votes;  // [r][y][x]

  int& at(int x, int y, int k) { return votes[(static_cast<std::size_t>(k) * ny + y) * nx + x]; }
  int at(int x, int y, int k) const { return votes[(static_cast<std::size_t>(k) * ny + y) * nx + x]; }
  double radius(int k) const { return r_min + k * bin; }
  double ideal_votes(int k) const;
};

CircleAccumulator circle_accumulator(const EdgeMap& edges, const HoughConfig& cfg);

struct CircleDetection {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;
  double score = 0.0;
};

struct EllipseDetection {
  double cx = 0.0;
  double cy = 0.0;
  double rx = 0.0;  // semi-major
  double ry = 0.0;  // semi-minor
  double rotation_deg = 0.0;
  double score = 0.0;
};

std::vector<CircleDetection> detect_circles(const RasterImage& img, const HoughConfig& cfg);
std::vector<CircleDetection> detect_circles(const EdgeMap& edges, const HoughConfig& cfg);

std::vector<EllipseDetection> detect_ellipses(const RasterImage& img, const HoughConfig& cfg);
std::vector<EllipseDetection> detect_ellipses(const EdgeMap& edges, const HoughConfig& cfg);

// Greedy suppression in (cx, cy, r) space: keeps the higher score, ties go to
// the larger radius, then lower (cy, cx).
std::vector<CircleDetection> suppress_circles(std::vector<CircleDetection> dets, double radius);
std::vector<EllipseDetection> suppress_ellipses(std::vector<EllipseDetection> dets, double radius);

struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

double iou(const Box& a, const Box& b);

struct Template {
  RasterImage image;
  std::string label;
  double min_scale = 1.0;
  double max_scale = 1.0;
  int scale_steps = 1;
};

struct TemplateBank {
  std::vector<Template> templates;
  double threshold = 0.6;  // normalized cross-correlation score

  void validate() const;

  // Templates cut from regions of interest of an exemplar image.
  static TemplateBank from_regions(const RasterImage& exemplar, const std::vector<Box>& regions,
                                   const std::vector<std::string>& labels, double min_scale, double max_scale,
                                   int scale_steps);
};

struct TemplateMatch {
  Box box;
  std::string label;
  double score = 0.0;
  double scale = 1.0;
};

// Normalized cross-correlation map of `templ` over `img` (both converted to
// gray); entry (x, y) scores the window with top-left corner (x, y).
std::vector<double> ncc_map(const RasterImage& img, const RasterImage& templ, int* out_w, int* out_h);

std::vector<TemplateMatch> match_templates(const RasterImage& img, const TemplateBank& bank);
std::vector<TemplateMatch> suppress_boxes(std::vector<TemplateMatch> matches, double max_iou);

struct FitOptions {
  int max_circles = 3;
  int max_ovals = 2;
  double min_oval_axis = 8.0;
};

// Circles first (largest perimeter support, non-duplicate), then ovals from the edges
// the circles do not explain. Throws ValidationError "unfittable" when
// nothing is found.
shape::ShapeLayout fit_layout(const RasterImage& img, const HoughConfig& cfg, const FitOptions& opts = {});

}  // namespace s2t::fit
