#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace s2t {

struct Rgb {
  float r = 0.f;
  float g = 0.f;
  float b = 0.f;

  bool operator==(const Rgb&) const = default;
};

// Interleaved (row-major, HWC) image with values in [0,1].
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, float fill = 1.f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  float& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> pixels() { return pixels_; }
  std::span<const float> pixels() const { return pixels_; }

  void fill(const Rgb& color);
  void set_rgb(int x, int y, const Rgb& color);
  Rgb rgb(int x, int y) const;

  // Clamps every value into [0,1] (NaN becomes 0).
  void clamp();

  bool operator==(const RasterImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> pixels_;
};

RasterImage to_gray(const RasterImage& img);
RasterImage to_rgb(const RasterImage& img);

// Joins two equally sized images side by side: a on the left, b on the right.
RasterImage hconcat(const RasterImage& a, const RasterImage& b);
RasterImage crop(const RasterImage& img, int x, int y, int w, int h);
RasterImage resize_bilinear(const RasterImage& img, int w, int h);

// Quantizes to 8 bits and back, the exact round trip a PNG file applies.
RasterImage quantize8(const RasterImage& img);

double mean_abs_diff(const RasterImage& a, const RasterImage& b);

std::vector<std::uint8_t> encode_png(const RasterImage& img);
RasterImage decode_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RasterImage& img);
RasterImage read_png(const std::filesystem::path& path);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace s2t
