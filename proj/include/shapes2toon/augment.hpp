#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "shapes2toon/corpus.hpp"
#include "shapes2toon/shape.hpp"

namespace s2t::augment {

struct TransformRanges {
  double max_rotate_deg = 25.0;
  double min_scale = 0.8;
  double max_scale = 1.2;
  double max_translate = 0.1;  // fraction of the image width
  bool allow_flip = true;
};

struct AugmentationPlan {
  int per_base = 15;
  TransformRanges ranges;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Resamples `img` under t (about the image center, dx/dy in pixels) with
// bilinear interpolation; exposed regions take `background`.
RasterImage warp_image(const RasterImage& img, const shape::AffineTransform& t, const Rgb& background = {1, 1, 1});

// Applies the same transform to both halves and records it.
corpus::PairedSample augment_pair(const corpus::PairedSample& p, const shape::AffineTransform& t);

// Transform for variant v of base b. Variant 0 is the identity.
shape::AffineTransform sample_transform(const AugmentationPlan& plan, int image_size, std::size_t base_index,
                                        int variant);

// Writes base_count * per_base samples under out_dir. Variant 0 of each base
// is a byte copy of the base pair; layouts are transformed in layout space.
corpus::CorpusManifest expand_corpus(const std::filesystem::path& base_dir, const corpus::CorpusManifest& manifest,
                                     const AugmentationPlan& plan, const std::filesystem::path& out_dir);

}  // namespace s2t::augment
