#include "shapes2toon/corpus.hpp"

#include <fstream>

#include "shapes2toon/errors.hpp"

namespace s2t::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

RasterImage PairedSample::joined() const { return hconcat(source, target); }

PairedSample PairedSample::from_joined(const RasterImage& joined) {
  if (joined.width() % 2 != 0) throw ValidationError("paired image width must be even");
  const int w = joined.width() / 2;
  PairedSample p;
  p.source = crop(joined, 0, 0, w, joined.height());
  p.target = crop(joined, w, 0, w, joined.height());
  return p;
}

const ManifestEntry& CorpusManifest::find(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw ValidationError("no such sample id: " + id);
}

json CorpusManifest::to_json() const {
  json items = json::array();
  for (const auto& e : entries) {
    json item = {{"id", e.id}, {"base_id", e.base_id}, {"seed", e.seed}, {"sha256", e.sha256}};
    if (e.transform) item["transform"] = shape::transform_to_json(*e.transform);
    items.push_back(std::move(item));
  }
  return {{"format", "shapes2toon-corpus-v1"},
          {"kind", kind},
          {"image_size", image_size},
          {"seed", seed},
          {"count", entries.size()},
          {"entries", std::move(items)}};
}

CorpusManifest CorpusManifest::from_json(const json& j) {
  try {
    CorpusManifest m;
    m.kind = j.at("kind").get<std::string>();
    m.image_size = j.at("image_size").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& item : j.at("entries")) {
      ManifestEntry e;
      e.id = item.at("id").get<std::string>();
      e.base_id = item.at("base_id").get<std::string>();
      e.seed = item.at("seed").get<std::uint64_t>();
      e.sha256 = item.at("sha256").get<std::string>();
      if (item.contains("transform")) e.transform = shape::transform_from_json(item.at("transform"));
      m.entries.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid corpus manifest: ") + e.what(), "manifest.json");
  }
}

void CorpusManifest::save(const fs::path& dir) const { write_text(dir / "manifest.json", to_json().dump(1) + "\n"); }

CorpusManifest CorpusManifest::load(const fs::path& dir) {
  const auto text = read_text(dir / "manifest.json");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), "manifest.json");
  }
  return from_json(j);
}

fs::path pair_path(const fs::path& dir, const std::string& id) { return dir / "pairs" / (id + ".png"); }
fs::path layout_path(const fs::path& dir, const std::string& id) { return dir / "layouts" / (id + ".json"); }

PairedSample load_pair(const fs::path& dir, const std::string& id) {
  PairedSample p = PairedSample::from_joined(read_png(pair_path(dir, id)));
  p.id = id;
  p.base_id = id;
  return p;
}

void prepare_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "pairs", ec);
  if (!ec) fs::create_directories(dir / "layouts", ec);
  if (ec) throw IoError("cannot create corpus directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("corpus directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

}  // namespace s2t::corpus
