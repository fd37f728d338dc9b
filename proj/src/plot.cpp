#include "shapes2toon/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace s2t::plot {

namespace {

struct Panel {
  const char* title;
  double train::LossRecord::*field;
  Rgb color;
};

const std::array<Panel, 3> kPanels = {{
    {"generator (adversarial)", &train::LossRecord::loss_g_adv, {0.12f, 0.38f, 0.75f}},
    {"discriminator", &train::LossRecord::loss_d, {0.80f, 0.30f, 0.15f}},
    {"L1", &train::LossRecord::loss_l1, {0.20f, 0.60f, 0.25f}},
}};

constexpr int kMargin = 36;

struct Frame {
  double x0, y0, w, h;        // plot area in pixels
  double smin, smax, vmin, vmax;

  double px(double step) const { return x0 + (smax > smin ? (step - smin) / (smax - smin) : 0.5) * w; }
  double py(double v) const { return y0 + h - (vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5) * h; }
};

Frame frame_for(const train::LossLog& log, const Panel& panel, int index, int width, int height) {
  const double pw = static_cast<double>(width) / kPanels.size();
  Frame f{index * pw + kMargin, 24.0, pw - 1.5 * kMargin, height - 24.0 - kMargin, 0, 1, 0, 1};
  if (!log.records.empty()) {
    f.smin = static_cast<double>(log.records.front().step);
    f.smax = static_cast<double>(log.records.back().step);
    f.vmin = f.vmax = log.records.front().*panel.field;
    for (const auto& r : log.records) {
      f.vmin = std::min(f.vmin, r.*panel.field);
      f.vmax = std::max(f.vmax, r.*panel.field);
    }
  }
  return f;
}

std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(c.r * 255)),
                static_cast<int>(std::lround(c.g * 255)), static_cast<int>(std::lround(c.b * 255)));
  return buf;
}

void draw_line(RasterImage& img, double x0, double y0, double x1, double y1, const Rgb& c) {
  const int n = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.set_rgb(x, y, c);
  }
}

}  // namespace

std::string loss_curves_svg(const train::LossLog& log, int width, int height) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < kPanels.size(); ++i) {
    const Panel& p = kPanels[i];
    const Frame f = frame_for(log, p, static_cast<int>(i), width, height);
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#888\"/>\n", f.x0,
                  f.y0, f.w, f.h);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">%s</text>\n", f.x0, p.title);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\">%.4g</text>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\">%.4g</text>\n",
                  f.x0 + 2, f.y0 + 10, f.vmax, f.x0 + 2, f.y0 + f.h - 2, f.vmin);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\">step %.0f</text>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" "
                  "text-anchor=\"end\">%.0f</text>\n",
                  f.x0, f.y0 + f.h + 14, f.smin, f.x0 + f.w, f.y0 + f.h + 14, f.smax);
    out += buf;
    if (log.records.empty()) continue;
    out += "<polyline fill=\"none\" stroke=\"" + hex(p.color) + "\" stroke-width=\"1.2\" points=\"";
    for (const auto& r : log.records) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", f.px(static_cast<double>(r.step)), f.py(r.*p.field));
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

RasterImage loss_curves_raster(const train::LossLog& log, int width, int height) {
  RasterImage img(width, height, 3, 1.f);
  const Rgb frame_color{0.55f, 0.55f, 0.55f};
  for (std::size_t i = 0; i < kPanels.size(); ++i) {
    const Panel& p = kPanels[i];
    const Frame f = frame_for(log, p, static_cast<int>(i), width, height);
    draw_line(img, f.x0, f.y0, f.x0 + f.w, f.y0, frame_color);
    draw_line(img, f.x0, f.y0 + f.h, f.x0 + f.w, f.y0 + f.h, frame_color);
    draw_line(img, f.x0, f.y0, f.x0, f.y0 + f.h, frame_color);
    draw_line(img, f.x0 + f.w, f.y0, f.x0 + f.w, f.y0 + f.h, frame_color);
    for (std::size_t k = 1; k < log.records.size(); ++k) {
      const auto& a = log.records[k - 1];
      const auto& b = log.records[k];
      draw_line(img, f.px(static_cast<double>(a.step)), f.py(a.*p.field), f.px(static_cast<double>(b.step)),
                f.py(b.*p.field), p.color);
    }
  }
  return img;
}

void write_loss_curves(const train::LossLog& log, const std::filesystem::path& out) {
  const std::string ext = out.extension().string();
  if (ext == ".svg") {
    write_text(out, loss_curves_svg(log));
  } else if (ext == ".png") {
    write_png(out, loss_curves_raster(log));
  } else {
    throw ValidationError("plot output must end in .svg or .png", "out");
  }
}

}  // namespace s2t::plot
