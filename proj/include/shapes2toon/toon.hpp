#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "shapes2toon/corpus.hpp"
#include "shapes2toon/image.hpp"
#include "shapes2toon/shape.hpp"

namespace s2t::toon {

struct EyeSpec {
  int count = 2;
  // Eye semi-height as a fraction of the face oval semi-height.
  double relative_size = 0.30;
  // Left eye center inside the face bounding box, in [0,1]^2; further eyes
  // are mirrored / spread horizontally.
  double rel_x = 0.36;
  double rel_y = 0.22;
};

struct ToonStyle {
  Rgb head_fill{0.08f, 0.08f, 0.10f};
  Rgb ear_fill{0.08f, 0.08f, 0.10f};
  Rgb face_fill{0.98f, 0.84f, 0.70f};
  Rgb ink{0.f, 0.f, 0.f};
  EyeSpec eyes;
  double outline_width = 2.0;  // canvas pixels
  Rgb background{1.f, 1.f, 1.f};

  void validate() const;

  static ToonStyle mouse();
  // Second palette for multi-style corpora.
  static ToonStyle mouse_alt();
};

enum class LayoutTemplate { mouse_face };

struct TemplateJitter {
  double position = 0.08;  // fraction of the nominal head radius
  double radius = 0.15;    // relative
};

inline constexpr int kTemplateCanvas = 256;
inline constexpr double kEarRatio = 0.55;

// Head circle, two ears, face oval, muzzle oval (in that order).
shape::ShapeLayout sample_layout(std::uint64_t seed, LayoutTemplate tmpl = LayoutTemplate::mouse_face,
                                 const TemplateJitter& jitter = {});

// Semantic roles recovered from an arbitrary layout: the largest circle is
// the head, the other circles ears, the largest oval the face, other ovals
// muzzles.
struct FaceRoles {
  std::size_t head = 0;
  std::vector<std::size_t> ears;
  std::optional<std::size_t> face;
  std::vector<std::size_t> muzzles;
};
FaceRoles identify_roles(const shape::ShapeLayout& layout);

RasterImage render_toon(const shape::ShapeLayout& layout, const ToonStyle& style, int w, int h);

struct CorpusOptions {
  int image_size = 256;
  std::vector<ToonStyle> styles{ToonStyle::mouse()};
  TemplateJitter jitter;
};

// Writes n_base pairs (source = rasterized layout, target = toon) plus
// layouts and manifest. Per-sample seeds are derive_seed(seed, i).
corpus::CorpusManifest build_corpus(int n_base, std::uint64_t seed, const std::filesystem::path& out_dir,
                                    const CorpusOptions& options = {});

corpus::PairedSample make_pair(const shape::ShapeLayout& layout, const ToonStyle& style, int image_size);

}  // namespace s2t::toon
