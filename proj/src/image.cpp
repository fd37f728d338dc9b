#include "shapes2toon/image.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include "shapes2toon/errors.hpp"

namespace s2t {

RasterImage::RasterImage(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0) throw ValidationError("image dimensions must be positive");
  if (channels != 1 && channels != 3) throw ValidationError("image channels must be 1 or 3");
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

void RasterImage::fill(const Rgb& color) {
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) set_rgb(x, y, color);
}

void RasterImage::set_rgb(int x, int y, const Rgb& color) {
  if (channels_ == 1) {
    at(x, y) = (color.r + color.g + color.b) / 3.f;
  } else {
    at(x, y, 0) = color.r;
    at(x, y, 1) = color.g;
    at(x, y, 2) = color.b;
  }
}

Rgb RasterImage::rgb(int x, int y) const {
  if (channels_ == 1) return {at(x, y), at(x, y), at(x, y)};
  return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
}

void RasterImage::clamp() {
  for (auto& v : pixels_) v = std::isnan(v) ? 0.f : std::clamp(v, 0.f, 1.f);
}

RasterImage to_gray(const RasterImage& img) {
  if (img.channels() == 1) return img;
  RasterImage out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out.at(x, y) = 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
  return out;
}

RasterImage to_rgb(const RasterImage& img) {
  if (img.channels() == 3) return img;
  RasterImage out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
  return out;
}

RasterImage hconcat(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    throw ValidationError("hconcat: images must have identical dimensions");
  RasterImage out(a.width() * 2, a.height(), a.channels());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      for (int c = 0; c < a.channels(); ++c) {
        out.at(x, y, c) = a.at(x, y, c);
        out.at(x + a.width(), y, c) = b.at(x, y, c);
      }
  return out;
}

RasterImage crop(const RasterImage& img, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || x0 + w > img.width() || y0 + h > img.height())
    throw ValidationError("crop: region outside image");
  RasterImage out(w, h, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
  return out;
}

RasterImage resize_bilinear(const RasterImage& img, int w, int h) {
  if (w == img.width() && h == img.height()) return img;
  RasterImage out(w, h, img.channels());
  const double sx = static_cast<double>(img.width()) / w;
  const double sy = static_cast<double>(img.height()) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(x0, y0, c) * (1 - tx) + img.at(x1, y0, c) * tx;
        const double bot = img.at(x0, y1, c) * (1 - tx) + img.at(x1, y1, c) * tx;
        out.at(x, y, c) = static_cast<float>(top * (1 - ty) + bot * ty);
      }
    }
  }
  return out;
}

namespace {

std::uint8_t to_byte(float v) {
  if (!(v > 0.f)) return 0;
  if (v >= 1.f) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.f));
}

}  // namespace

RasterImage quantize8(const RasterImage& img) {
  RasterImage out = img;
  for (auto& v : out.pixels()) v = to_byte(v) / 255.f;
  return out;
}

double mean_abs_diff(const RasterImage& a, const RasterImage& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    throw ValidationError("mean_abs_diff: images must have identical dimensions");
  double sum = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) sum += std::abs(static_cast<double>(pa[i]) - pb[i]);
  return sum / static_cast<double>(pa.size());
}

// --- PNG ------------------------------------------------------------------
// libpng reports errors by longjmp; every C++ object the handlers touch is
// constructed before setjmp so nothing is skipped on unwind.

namespace {

thread_local std::string g_png_error;

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + length > cur->bytes.size()) png_error(png, "truncated PNG data");
  std::memcpy(data, cur->bytes.data() + cur->offset, length);
  cur->offset += length;
}

void png_error_jump(png_structp png, png_const_charp msg) {
  g_png_error = msg;
  png_longjmp(png, 1);
}
void png_warning_ignore(png_structp, png_const_charp) {}

}  // namespace

namespace {

void write_png_body(png_structp png, png_infop info, const RasterImage& img, std::vector<std::uint8_t>* out) {
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  const int color = img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()) * img.channels());
  const auto px = img.pixels();
  for (int y = 0; y < img.height(); ++y) {
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = to_byte(px[y * row.size() + i]);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  if (img.empty()) throw ValidationError("encode_png: empty image");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_jump, png_warning_ignore);
  if (png == nullptr) throw Error("png: cannot allocate writer");
  png_infop info = png_create_info_struct(png);
  auto out = std::make_unique<std::vector<std::uint8_t>>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png: " + g_png_error);
  }
  write_png_body(png, info, img, out.get());
  png_destroy_write_struct(&png, &info);
  return std::move(*out);
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw ParseError("not a PNG image");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_jump, png_warning_ignore);
  if (png == nullptr) throw Error("png: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  PngReadCursor cursor{bytes, 0};
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0;
  png_uint_32 h = 0;
  int channels = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("png: " + g_png_error);
  }
  png_set_read_fn(png, &cursor, png_read_from_span);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  if (w == 0 || h == 0 || w > 16384 || h > 16384) png_error(png, "unsupported dimensions");
  {
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  channels = png_get_channels(png, info);
  buffer.resize(static_cast<std::size_t>(w) * h * channels);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  const int out_channels = (channels <= 2) ? 1 : 3;
  const bool has_alpha = channels == 2 || channels == 4;
  RasterImage img(static_cast<int>(w), static_cast<int>(h), out_channels);
  // Alpha is composited over white, the corpus background.
  for (png_uint_32 y = 0; y < h; ++y)
    for (png_uint_32 x = 0; x < w; ++x) {
      const std::uint8_t* p = rows[y] + static_cast<std::size_t>(x) * channels;
      const float alpha = has_alpha ? p[channels - 1] / 255.f : 1.f;
      for (int c = 0; c < out_channels; ++c) {
        const float v = p[c] / 255.f;
        img.at(static_cast<int>(x), static_cast<int>(y), c) = has_alpha ? v * alpha + (1.f - alpha) : v;
      }
    }
  return img;
}

// --- files ------------------------------------------------------------------

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_png(const std::filesystem::path& path, const RasterImage& img) { write_file(path, encode_png(img)); }

RasterImage read_png(const std::filesystem::path& path) { return decode_png(read_file(path)); }

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace s2t
