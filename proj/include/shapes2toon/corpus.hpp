#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shapes2toon/image.hpp"
#include "shapes2toon/shape.hpp"

namespace s2t::corpus {

// Source/target pair; on disk the halves are joined 2W x H (source left).
struct PairedSample {
  RasterImage source;
  RasterImage target;
  std::string id;
  std::string base_id;
  std::optional<shape::AffineTransform> transform;

  RasterImage joined() const;
  static PairedSample from_joined(const RasterImage& joined);
};

struct ManifestEntry {
  std::string id;
  std::string base_id;
  std::uint64_t seed = 0;
  std::string sha256;
  std::optional<shape::AffineTransform> transform;
};

// Directory layout: pairs/{id}.png, layouts/{id}.json, manifest.json.
struct CorpusManifest {
  std::string kind = "base";  // "base" or "augmented"
  int image_size = 256;
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  const ManifestEntry& find(const std::string& id) const;

  nlohmann::json to_json() const;
  static CorpusManifest from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& dir) const;
  static CorpusManifest load(const std::filesystem::path& dir);
};

std::filesystem::path pair_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path layout_path(const std::filesystem::path& dir, const std::string& id);

PairedSample load_pair(const std::filesystem::path& dir, const std::string& id);

// Creates the corpus directories, failing with IoError when the location is
// not writable.
void prepare_directory(const std::filesystem::path& dir);

}  // namespace s2t::corpus
