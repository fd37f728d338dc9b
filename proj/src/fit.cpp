#include "shapes2toon/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "shapes2toon/errors.hpp"

namespace s2t::fit {

namespace {

constexpr double kPi = std::numbers::pi;

// Candidates need at least this many raw votes regardless of score.
constexpr int kMinVotes = 6;

double ellipse_perimeter(double a, double b) {
  return kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
}

bool circle_before(const CircleDetection& a, const CircleDetection& b) {
  return std::tie(b.score, b.r, a.cy, a.cx) < std::tie(a.score, a.r, b.cy, b.cx);
}

bool ellipse_before(const EllipseDetection& a, const EllipseDetection& b) {
  return std::tie(b.score, b.rx, a.cy, a.cx) < std::tie(a.score, a.rx, b.cy, b.cx);
}

}  // namespace

void HoughConfig::validate() const {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw ValidationError("need 0 < r_min < r_max", "hough.r_min");
  if (!(bin > 0.0)) throw ValidationError("bin must be > 0", "hough.bin");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in (0,1]", "hough.threshold");
  if (nms_radius < 0.0) throw ValidationError("nms_radius must be >= 0", "hough.nms_radius");
  if (edge_threshold < 0.0) throw ValidationError("edge_threshold must be >= 0", "hough.edge_threshold");
  if (max_results < 1) throw ValidationError("max_results must be >= 1", "hough.max_results");
}

// --- edges --------------------------------------------------------------------

EdgeMap extract_edges(const RasterImage& img, double threshold) {
  const RasterImage g = img.channels() == 1 ? img : to_gray(img);
  const int w = g.width();
  const int h = g.height();
  auto px = [&](int x, int y) -> double {
    return g.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  std::vector<double> gx(static_cast<std::size_t>(w) * h), gy(gx.size()), mag(gx.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double sy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = sx / 4.0;
      gy[i] = sy / 4.0;
      mag[i] = std::hypot(gx[i], gy[i]);
    }
  }

  // Neighbor magnitude along the gradient, counted only when the neighbor's
  // gradient points the same way (the two sides of a thin stroke are separate
  // edges).
  auto along = [&](int x, int y, int ox, int oy, std::size_t self) -> double {
    const int nx = x + ox;
    const int ny = y + oy;
    if (nx < 0 || ny < 0 || nx >= w || ny >= h) return 0.0;
    const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
    return gx[j] * gx[self] + gy[j] * gy[self] > 0.0 ? mag[j] : 0.0;
  };

  EdgeMap out;
  out.width = w;
  out.height = h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (mag[i] <= threshold || mag[i] == 0.0) continue;
      const double ux = gx[i] / mag[i];
      const double uy = gy[i] / mag[i];
      // Quantize the gradient direction to one of the 8 neighbors.
      const int ox = static_cast<int>(std::lround(ux * std::numbers::sqrt2));
      const int oy = static_cast<int>(std::lround(uy * std::numbers::sqrt2));
      const int qx = std::clamp(ox, -1, 1);
      const int qy = std::clamp(oy, -1, 1);
      if (mag[i] > along(x, y, -qx, -qy, i) && mag[i] >= along(x, y, qx, qy, i))
        out.points.push_back({x, y, ux, uy, mag[i]});
    }
  }
  return out;
}

// --- circles ------------------------------------------------------------------

double CircleAccumulator::ideal_votes(int k) const { return 2.0 * kPi * radius(k); }

CircleAccumulator circle_accumulator(const EdgeMap& edges, const HoughConfig& cfg) {
  cfg.validate();
  CircleAccumulator acc;
  acc.bin = cfg.bin;
  acc.r_min = cfg.r_min;
  acc.nx = static_cast<int>(std::ceil(edges.width / cfg.bin));
  acc.ny = static_cast<int>(std::ceil(edges.height / cfg.bin));
  acc.nr = static_cast<int>(std::floor((cfg.r_max - cfg.r_min) / cfg.bin)) + 1;
  acc.votes.assign(static_cast<std::size_t>(acc.nx) * acc.ny * acc.nr, 0);
  for (const EdgePoint& p : edges.points) {
    const double px = p.x + 0.5;
    const double py = p.y + 0.5;
    for (int k = 0; k < acc.nr; ++k) {
      const double r = acc.radius(k);
      for (int sign = -1; sign <= 1; sign += 2) {
        const double cx = px + sign * r * p.gx;
        const double cy = py + sign * r * p.gy;
        const double bx = std::floor(cx / cfg.bin);
        const double by = std::floor(cy / cfg.bin);
        if (bx < 0 || by < 0 || bx >= acc.nx || by >= acc.ny) continue;
        ++acc.at(static_cast<int>(bx), static_cast<int>(by), k);
      }
    }
  }
  return acc;
}

std::vector<CircleDetection> suppress_circles(std::vector<CircleDetection> dets, double radius) {
  std::sort(dets.begin(), dets.end(), circle_before);
  std::vector<CircleDetection> kept;
  for (const auto& d : dets) {
    bool clear = true;
    for (const auto& k : kept) {
      const double dist = std::sqrt((d.cx - k.cx) * (d.cx - k.cx) + (d.cy - k.cy) * (d.cy - k.cy) +
                                    (d.r - k.r) * (d.r - k.r));
      if (dist <= radius) {
        clear = false;
        break;
      }
    }
    if (clear) kept.push_back(d);
  }
  return kept;
}

namespace {

// Sum over the 3x3x3 neighbourhood, done as three separable passes.
std::vector<int> box_sum3(const CircleAccumulator& acc) {
  const int nx = acc.nx, ny = acc.ny, nr = acc.nr;
  auto idx = [&](int x, int y, int k) { return (static_cast<std::size_t>(k) * ny + y) * nx + x; };
  std::vector<int> a = acc.votes, b(a.size());
  for (int k = 0; k < nr; ++k)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x)
        b[idx(x, y, k)] = a[idx(x, y, k)] + (x > 0 ? a[idx(x - 1, y, k)] : 0) + (x + 1 < nx ? a[idx(x + 1, y, k)] : 0);
  for (int k = 0; k < nr; ++k)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x)
        a[idx(x, y, k)] = b[idx(x, y, k)] + (y > 0 ? b[idx(x, y - 1, k)] : 0) + (y + 1 < ny ? b[idx(x, y + 1, k)] : 0);
  for (int k = 0; k < nr; ++k)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x)
        b[idx(x, y, k)] = a[idx(x, y, k)] + (k > 0 ? a[idx(x, y, k - 1)] : 0) + (k + 1 < nr ? a[idx(x, y, k + 1)] : 0);
  return b;
}

}  // namespace

std::vector<CircleDetection> detect_circles(const EdgeMap& edges, const HoughConfig& cfg) {
  const CircleAccumulator acc = circle_accumulator(edges, cfg);
  const std::vector<int> sum = box_sum3(acc);
  auto sum_at = [&](int x, int y, int k) { return sum[(static_cast<std::size_t>(k) * acc.ny + y) * acc.nx + x]; };
  std::vector<CircleDetection> cands;
  for (int k = 0; k < acc.nr; ++k) {
    // An edge point votes once per radius bin, so the box sees it three times.
    const double ideal = 3.0 * acc.ideal_votes(k);
    for (int y = 0; y < acc.ny; ++y) {
      for (int x = 0; x < acc.nx; ++x) {
        const int v = sum_at(x, y, k);
        if (v < kMinVotes || v < cfg.threshold * ideal) continue;
        bool peak = true;
        double sw = 0, sx = 0, sy = 0, sr = 0;
        for (int dk = -1; dk <= 1 && peak; ++dk) {
          for (int dy = -1; dy <= 1 && peak; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx, yy = y + dy, kk = k + dk;
              if (xx < 0 || yy < 0 || kk < 0 || xx >= acc.nx || yy >= acc.ny || kk >= acc.nr) continue;
              if (sum_at(xx, yy, kk) > v) {
                peak = false;
                break;
              }
              const int u = acc.at(xx, yy, kk);
              sw += u;
              sx += u * (xx + 0.5) * acc.bin;
              sy += u * (yy + 0.5) * acc.bin;
              sr += u * acc.radius(kk);
            }
          }
        }
        if (!peak || sw <= 0) continue;
        cands.push_back({sx / sw, sy / sw, sr / sw, v / ideal});
      }
    }
  }
  auto kept = suppress_circles(std::move(cands), cfg.nms_radius);
  if (static_cast<int>(kept.size()) > cfg.max_results) kept.resize(static_cast<std::size_t>(cfg.max_results));
  return kept;
}

std::vector<CircleDetection> detect_circles(const RasterImage& img, const HoughConfig& cfg) {
  cfg.validate();
  return detect_circles(extract_edges(img, cfg.edge_threshold), cfg);
}

// --- ellipses -----------------------------------------------------------------

std::vector<EllipseDetection> suppress_ellipses(std::vector<EllipseDetection> dets, double radius) {
  std::sort(dets.begin(), dets.end(), ellipse_before);
  std::vector<EllipseDetection> kept;
  for (const auto& d : dets) {
    bool clear = true;
    for (const auto& k : kept) {
      const double dist = std::sqrt((d.cx - k.cx) * (d.cx - k.cx) + (d.cy - k.cy) * (d.cy - k.cy) +
                                    (d.rx - k.rx) * (d.rx - k.rx) + (d.ry - k.ry) * (d.ry - k.ry));
      if (dist <= radius) {
        clear = false;
        break;
      }
    }
    if (clear) kept.push_back(d);
  }
  return kept;
}

std::vector<EllipseDetection> detect_ellipses(const EdgeMap& edges, const HoughConfig& cfg) {
  cfg.validate();
  constexpr double kAxisAlign = 0.95;   // |cos| between gradient and the major axis
  constexpr double kAntiParallel = -0.9;
  constexpr double kNormalAlign = 0.9;  // third point gradient vs ellipse normal
  constexpr double kMinAxisFraction = 0.05;

  const auto& pts = edges.points;
  const int nbins = static_cast<int>(std::ceil(cfg.r_max / cfg.bin)) + 2;
  std::vector<int> hist(static_cast<std::size_t>(nbins));
  std::vector<double> hist_sum(hist.size());
  std::vector<EllipseDetection> cands;

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const EdgePoint& p1 = pts[i];
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const EdgePoint& p2 = pts[j];
      const double dx = p2.x - p1.x;
      const double dy = p2.y - p1.y;
      const double len = std::hypot(dx, dy);
      const double a = len / 2.0;
      if (a < cfg.r_min || a > cfg.r_max) continue;
      const double ux = dx / len;
      const double uy = dy / len;
      const double c1 = p1.gx * ux + p1.gy * uy;
      const double c2 = p2.gx * ux + p2.gy * uy;
      if (std::abs(c1) < kAxisAlign || std::abs(c2) < kAxisAlign) continue;
      if (p1.gx * p2.gx + p1.gy * p2.gy > kAntiParallel) continue;

      const double cx = (p1.x + p2.x) / 2.0 + 0.5;
      const double cy = (p1.y + p2.y) / 2.0 + 0.5;
      std::fill(hist.begin(), hist.end(), 0);
      std::fill(hist_sum.begin(), hist_sum.end(), 0.0);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k == i || k == j) continue;
        const EdgePoint& p3 = pts[k];
        const double rx = p3.x + 0.5 - cx;
        const double ry = p3.y + 0.5 - cy;
        if (std::abs(rx) > a || std::abs(ry) > a) continue;
        const double xl = rx * ux + ry * uy;
        const double yl = -rx * uy + ry * ux;
        const double denom = 1.0 - (xl * xl) / (a * a);
        if (denom < kMinAxisFraction) continue;
        const double b = std::sqrt(yl * yl / denom);
        if (b < cfg.r_min || b > a * 1.05) continue;
        // Ellipse normal at p3 in the local frame is (x/a^2, y/b^2).
        const double nxl = xl / (a * a);
        const double nyl = yl / (b * b);
        const double nwx = nxl * ux - nyl * uy;
        const double nwy = nxl * uy + nyl * ux;
        const double nn = std::hypot(nwx, nwy);
        if (nn == 0.0 || std::abs(nwx * p3.gx + nwy * p3.gy) / nn < kNormalAlign) continue;
        const int bb = static_cast<int>(std::floor(b / cfg.bin));
        if (bb >= nbins) continue;
        ++hist[static_cast<std::size_t>(bb)];
        hist_sum[static_cast<std::size_t>(bb)] += b;
      }
      int best = -1;
      int best_votes = 0;
      for (int k = 0; k < nbins; ++k) {
        const int v = hist[k] + (k > 0 ? hist[k - 1] : 0) + (k + 1 < nbins ? hist[k + 1] : 0);
        if (v > best_votes) {
          best_votes = v;
          best = k;
        }
      }
      if (best < 0 || best_votes < kMinVotes) continue;
      double bsum = 0.0;
      for (int k = std::max(0, best - 1); k <= std::min(nbins - 1, best + 1); ++k) bsum += hist_sum[k];
      const double b = std::min(bsum / best_votes, a);
      const double score = best_votes / ellipse_perimeter(a, b);
      if (score < cfg.threshold) continue;
      double rot = std::atan2(uy, ux) * 180.0 / kPi;
      if (rot < 0) rot += 180.0;
      if (rot >= 180.0) rot -= 180.0;
      cands.push_back({cx, cy, a, b, rot, score});
    }
  }
  auto kept = suppress_ellipses(std::move(cands), cfg.nms_radius);
  if (static_cast<int>(kept.size()) > cfg.max_results) kept.resize(static_cast<std::size_t>(cfg.max_results));
  return kept;
}

std::vector<EllipseDetection> detect_ellipses(const RasterImage& img, const HoughConfig& cfg) {
  cfg.validate();
  return detect_ellipses(extract_edges(img, cfg.edge_threshold), cfg);
}

// --- templates ----------------------------------------------------------------

double iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

void TemplateBank::validate() const {
  if (templates.empty()) throw ValidationError("template bank is empty", "bank.templates");
  if (!(threshold >= -1.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in [-1,1]", "bank.threshold");
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& t = templates[i];
    const std::string path = "bank.templates[" + std::to_string(i) + "]";
    if (t.image.width() < 2 || t.image.height() < 2) throw ValidationError("template smaller than 2x2", path);
    if (!(t.min_scale > 0.0) || t.max_scale < t.min_scale) throw ValidationError("need 0 < min_scale <= max_scale", path);
    if (t.scale_steps < 1) throw ValidationError("scale_steps must be >= 1", path);
  }
}

TemplateBank TemplateBank::from_regions(const RasterImage& exemplar, const std::vector<Box>& regions,
                                        const std::vector<std::string>& labels, double min_scale, double max_scale,
                                        int scale_steps) {
  if (regions.size() != labels.size()) throw ValidationError("one label per region required", "labels");
  TemplateBank bank;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Box& r = regions[i];
    const int x = static_cast<int>(std::lround(r.x));
    const int y = static_cast<int>(std::lround(r.y));
    const int w = static_cast<int>(std::lround(r.w));
    const int h = static_cast<int>(std::lround(r.h));
    bank.templates.push_back({crop(exemplar, x, y, w, h), labels[i], min_scale, max_scale, scale_steps});
  }
  bank.validate();
  return bank;
}

std::vector<double> ncc_map(const RasterImage& img, const RasterImage& templ, int* out_w, int* out_h) {
  const RasterImage g = img.channels() == 1 ? img : to_gray(img);
  const RasterImage t = templ.channels() == 1 ? templ : to_gray(templ);
  const int W = g.width(), H = g.height(), w = t.width(), h = t.height();
  if (w > W || h > H) throw ValidationError("template larger than image");
  const int ow = W - w + 1;
  const int oh = H - h + 1;
  const double n = static_cast<double>(w) * h;

  double tmean = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) tmean += t.at(x, y);
  tmean /= n;
  std::vector<double> tz(static_cast<std::size_t>(w) * h);
  double tnorm = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = t.at(x, y) - tmean;
      tz[static_cast<std::size_t>(y) * w + x] = v;
      tnorm += v * v;
    }
  tnorm = std::sqrt(tnorm);

  // Integral images of the search image and its square.
  std::vector<double> s1(static_cast<std::size_t>(W + 1) * (H + 1)), s2(s1.size());
  auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * (W + 1) + x; };
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const double v = g.at(x, y);
      s1[idx(x + 1, y + 1)] = v + s1[idx(x, y + 1)] + s1[idx(x + 1, y)] - s1[idx(x, y)];
      s2[idx(x + 1, y + 1)] = v * v + s2[idx(x, y + 1)] + s2[idx(x + 1, y)] - s2[idx(x, y)];
    }

  std::vector<double> out(static_cast<std::size_t>(ow) * oh, 0.0);
  if (tnorm < 1e-12) {
    *out_w = ow;
    *out_h = oh;
    return out;
  }
  const float* pix = g.pixels().data();
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const double sum = s1[idx(x + w, y + h)] - s1[idx(x, y + h)] - s1[idx(x + w, y)] + s1[idx(x, y)];
      const double sq = s2[idx(x + w, y + h)] - s2[idx(x, y + h)] - s2[idx(x + w, y)] + s2[idx(x, y)];
      const double var = sq - sum * sum / n;
      if (var < 1e-12) continue;
      double num = 0.0;
      for (int ty = 0; ty < h; ++ty) {
        const float* row = pix + static_cast<std::size_t>(y + ty) * W + x;
        const double* trow = tz.data() + static_cast<std::size_t>(ty) * w;
        for (int tx = 0; tx < w; ++tx) num += row[tx] * trow[tx];
      }
      out[static_cast<std::size_t>(y) * ow + x] = std::clamp(num / (std::sqrt(var) * tnorm), -1.0, 1.0);
    }
  }
  *out_w = ow;
  *out_h = oh;
  return out;
}

std::vector<TemplateMatch> suppress_boxes(std::vector<TemplateMatch> matches, double max_iou) {
  std::stable_sort(matches.begin(), matches.end(), [](const TemplateMatch& a, const TemplateMatch& b) {
    return std::tie(b.score, a.box.y, a.box.x) < std::tie(a.score, b.box.y, b.box.x);
  });
  std::vector<TemplateMatch> kept;
  for (const auto& m : matches) {
    bool clear = true;
    for (const auto& k : kept)
      if (iou(m.box, k.box) > max_iou) {
        clear = false;
        break;
      }
    if (clear) kept.push_back(m);
  }
  return kept;
}

std::vector<TemplateMatch> match_templates(const RasterImage& img, const TemplateBank& bank) {
  bank.validate();
  const RasterImage g = img.channels() == 1 ? img : to_gray(img);
  std::vector<TemplateMatch> cands;
  for (std::size_t ti = 0; ti < bank.templates.size(); ++ti) {
    const Template& t = bank.templates[ti];
    if (t.image.width() > g.width() || t.image.height() > g.height())
      throw ValidationError("template larger than image", "bank.templates[" + std::to_string(ti) + "]");
    const RasterImage tg = t.image.channels() == 1 ? t.image : to_gray(t.image);
    for (int s = 0; s < t.scale_steps; ++s) {
      const double scale =
          t.scale_steps == 1 ? t.min_scale : t.min_scale + (t.max_scale - t.min_scale) * s / (t.scale_steps - 1);
      const int w = static_cast<int>(std::lround(tg.width() * scale));
      const int h = static_cast<int>(std::lround(tg.height() * scale));
      if (w < 2 || h < 2 || w > g.width() || h > g.height()) continue;
      const RasterImage scaled = (w == tg.width() && h == tg.height()) ? tg : resize_bilinear(tg, w, h);
      int ow = 0, oh = 0;
      const auto map = ncc_map(g, scaled, &ow, &oh);
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          const double v = map[static_cast<std::size_t>(y) * ow + x];
          if (v < bank.threshold) continue;
          bool peak = true;
          for (int dy = -1; dy <= 1 && peak; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int xx = x + dx, yy = y + dy;
              if (xx < 0 || yy < 0 || xx >= ow || yy >= oh) continue;
              if (map[static_cast<std::size_t>(yy) * ow + xx] > v) {
                peak = false;
                break;
              }
            }
          if (peak) cands.push_back({{double(x), double(y), double(w), double(h)}, t.label, v, scale});
        }
      }
    }
  }
  return suppress_boxes(std::move(cands), 0.3);
}

// --- layout fitting -----------------------------------------------------------

shape::ShapeLayout fit_layout(const RasterImage& img, const HoughConfig& cfg, const FitOptions& opts) {
  cfg.validate();
  const EdgeMap edges = extract_edges(img, cfg.edge_threshold);

  // Rank by absolute perimeter support so small detail circles do not displace large, partly hidden ones.
  auto ranked = detect_circles(edges, cfg);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const CircleDetection& a, const CircleDetection& b) { return a.score * a.r > b.score * b.r; });
  std::vector<CircleDetection> circles;
  for (const auto& c : ranked) {
    if (static_cast<int>(circles.size()) >= opts.max_circles) break;
    bool duplicate = false;
    for (const auto& k : circles) {
      const double d = std::hypot(c.cx - k.cx, c.cy - k.cy);
      if (d < 0.5 * std::max(c.r, k.r) && std::abs(c.r - k.r) < 0.5 * std::max(c.r, k.r)) duplicate = true;
    }
    if (!duplicate) circles.push_back(c);
  }

  // Ovals come from the edges the accepted circles do not explain.
  constexpr double kExplained = 3.0;
  EdgeMap rest;
  rest.width = edges.width;
  rest.height = edges.height;
  for (const auto& p : edges.points) {
    bool explained = false;
    for (const auto& c : circles)
      if (std::abs(std::hypot(p.x + 0.5 - c.cx, p.y + 0.5 - c.cy) - c.r) <= kExplained) explained = true;
    if (!explained) rest.points.push_back(p);
  }
  std::vector<EllipseDetection> ovals;
  if (opts.max_ovals > 0) {
    HoughConfig ecfg = cfg;
    ecfg.r_min = std::max(cfg.r_min, opts.min_oval_axis);
    for (const auto& e : detect_ellipses(rest, ecfg)) {
      if (static_cast<int>(ovals.size()) >= opts.max_ovals) break;
      bool duplicate = false;
      for (const auto& k : ovals)
        if (std::hypot(e.cx - k.cx, e.cy - k.cy) < 0.5 * std::min(e.ry, k.ry)) duplicate = true;
      if (!duplicate) ovals.push_back(e);
    }
  }
  if (circles.empty() && ovals.empty()) throw ValidationError("unfittable: no circles or ovals detected");

  shape::ShapeLayout layout;
  layout.canvas_w = img.width();
  layout.canvas_h = img.height();
  for (const auto& c : circles) layout.shapes.push_back(shape::ShapePrimitive::circle(c.cx, c.cy, c.r));
  for (const auto& e : ovals)
    layout.shapes.push_back(shape::ShapePrimitive::oval(e.cx, e.cy, e.rx, e.ry, e.rotation_deg));
  return layout;
}

}  // namespace s2t::fit
