#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "shapes2toon/nn/models.hpp"

namespace s2t::nn {

struct CheckpointInfo {
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  long step = 0;
  std::uint64_t seed = 0;
  std::string id;  // content hash of the parameter blobs, filled on save/load
};

// Directory layout: manifest.json plus params/NNNN.bin, one blob per parameter.
// Blob: u64 name length, name bytes, u64 rank, u64 dims..., float32 values (all LE).
// The directory is written beside the target and swapped in, so an existing
// checkpoint survives a failed save.
CheckpointInfo save_checkpoint(const std::filesystem::path& dir, const Pix2Pix<float>& model, CheckpointInfo info);

Pix2Pix<float> load_checkpoint(const std::filesystem::path& dir, CheckpointInfo* info = nullptr);

// Reads only the generator parameters.
UNetGenerator<float> load_generator(const std::filesystem::path& dir, CheckpointInfo* info = nullptr);

CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir);

std::vector<std::uint8_t> encode_param_blob(const Parameter<float>& p);
Parameter<float> decode_param_blob(std::span<const std::uint8_t> bytes);

}  // namespace s2t::nn
