#include "shapes2toon/nn/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include <openssl/evp.h>

namespace s2t::nn {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr const char* kFormat = "shapes2toon-checkpoint-v1";

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw ParseError("truncated parameter blob");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += 8;
  return v;
}

std::string blob_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "params/%04zu.bin", index);
  return buf;
}

class Hasher {
 public:
  Hasher() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Hasher() { EVP_MD_CTX_free(ctx_); }
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;
  void update(std::span<const std::uint8_t> b) { EVP_DigestUpdate(ctx_, b.data(), b.size()); }
  std::string hex16() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::string s;
    char buf[3];
    for (unsigned i = 0; i < 8 && i < len; ++i) {
      std::snprintf(buf, sizeof buf, "%02x", md[i]);
      s += buf;
    }
    return s;
  }

 private:
  EVP_MD_CTX* ctx_;
};

json param_entry(std::size_t index, const std::string& group, const Parameter<float>& p) {
  return {{"name", p.name}, {"group", group}, {"file", blob_name(index)}, {"shape", p.value.shape()}};
}

// Loads the blobs listed in the manifest into `set`, in order, starting at
// manifest entry `offset`.
void load_into(const fs::path& dir, const json& entries, std::size_t offset, ParameterSet<float>& set, Hasher* hasher) {
  if (entries.size() < offset + set.size())
    throw ValidationError("checkpoint has fewer parameters than the architecture", "params");
  for (std::size_t i = 0; i < set.size(); ++i) {
    const json& e = entries.at(offset + i);
    const auto bytes = read_file(dir / e.at("file").get<std::string>());
    if (hasher) hasher->update(bytes);
    Parameter<float> p = decode_param_blob(bytes);
    Parameter<float>& dst = set[i];
    if (p.name != dst.name || p.value.shape() != dst.value.shape())
      throw ValidationError("checkpoint/architecture mismatch at " + dst.name + ": found " + p.name + " " +
                                shape_str(p.value.shape()) + ", expected " + shape_str(dst.value.shape()),
                            "params[" + std::to_string(offset + i) + "]");
    dst.value = std::move(p.value);
    dst.grad = Tensor<float>(dst.value.shape());
  }
}

json read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw IoError("no checkpoint manifest at " + path.string());
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint manifest: ") + e.what());
  }
  if (j.value("format", "") != kFormat) throw ParseError("unsupported checkpoint format", "format");
  return j;
}

CheckpointInfo info_from(const json& j) {
  CheckpointInfo info;
  try {
    info.generator = GeneratorConfig::from_json(j.at("generator"));
    info.discriminator = DiscriminatorConfig::from_json(j.at("discriminator"));
    info.step = j.at("step").get<long>();
    info.seed = j.at("seed").get<std::uint64_t>();
    info.id = j.value("id", "");
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint manifest: ") + e.what());
  }
  return info;
}

}  // namespace

std::vector<std::uint8_t> encode_param_blob(const Parameter<float>& p) {
  std::vector<std::uint8_t> out;
  out.reserve(24 + p.name.size() + 8 * p.value.shape().size() + 4 * p.value.numel());
  put_u64(out, p.name.size());
  out.insert(out.end(), p.name.begin(), p.name.end());
  put_u64(out, p.value.shape().size());
  for (int d : p.value.shape()) put_u64(out, static_cast<std::uint64_t>(d));
  const std::size_t at = out.size();
  out.resize(at + 4 * p.value.numel());
  std::memcpy(out.data() + at, p.value.data(), 4 * p.value.numel());
  return out;
}

Parameter<float> decode_param_blob(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const std::uint64_t name_len = get_u64(bytes, pos);
  if (name_len > 4096 || pos + name_len > bytes.size()) throw ParseError("bad parameter name length");
  Parameter<float> p;
  p.name.assign(reinterpret_cast<const char*>(bytes.data() + pos), name_len);
  pos += name_len;
  const std::uint64_t rank = get_u64(bytes, pos);
  if (rank > 8) throw ParseError("bad parameter rank in " + p.name);
  Shape shape;
  for (std::uint64_t i = 0; i < rank; ++i) {
    const std::uint64_t d = get_u64(bytes, pos);
    if (d > (1u << 30)) throw ParseError("bad parameter dimension in " + p.name);
    shape.push_back(static_cast<int>(d));
  }
  const std::size_t n = shape_numel(shape);
  if (bytes.size() - pos != 4 * n) throw ParseError("parameter blob size does not match shape for " + p.name);
  std::vector<float> values(n);
  std::memcpy(values.data(), bytes.data() + pos, 4 * n);
  p.value = Tensor<float>(shape, std::move(values));
  p.grad = Tensor<float>(shape);
  return p;
}

CheckpointInfo save_checkpoint(const fs::path& dir, const Pix2Pix<float>& model, CheckpointInfo info) {
  info.generator = model.generator.config();
  info.discriminator = model.discriminator.config();
  fs::path target = dir;
  if (target.filename().empty()) target = target.parent_path();
  const fs::path staging = target.string() + ".partial";
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging / "params", ec);
  if (ec) throw IoError("cannot create checkpoint directory " + staging.string() + ": " + ec.message());

  Hasher hasher;
  json entries = json::array();
  std::size_t index = 0;
  auto write_set = [&](const ParameterSet<float>& set, const char* group) {
    for (const auto& p : set.items()) {
      const auto blob = encode_param_blob(p);
      hasher.update(blob);
      write_file(staging / blob_name(index), blob);
      entries.push_back(param_entry(index, group, p));
      ++index;
    }
  };
  write_set(model.generator.params(), "generator");
  write_set(model.discriminator.params(), "discriminator");
  info.id = hasher.hex16();

  json m = {{"format", kFormat},
            {"generator", info.generator.to_json()},
            {"discriminator", info.discriminator.to_json()},
            {"step", info.step},
            {"seed", info.seed},
            {"id", info.id},
            {"params", entries}};
  write_text(staging / "manifest.json", m.dump(1) + "\n");

  fs::remove_all(target, ec);
  if (ec) throw IoError("cannot replace checkpoint " + target.string() + ": " + ec.message());
  fs::rename(staging, target, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + target.string() + ": " + ec.message());
  return info;
}

CheckpointInfo read_checkpoint_info(const fs::path& dir) { return info_from(read_manifest(dir)); }

Pix2Pix<float> load_checkpoint(const fs::path& dir, CheckpointInfo* info) {
  const json m = read_manifest(dir);
  CheckpointInfo ci = info_from(m);
  Pix2Pix<float> model(ci.generator, ci.discriminator, 0);
  Hasher hasher;
  load_into(dir, m.at("params"), 0, model.generator.params(), &hasher);
  load_into(dir, m.at("params"), model.generator.params().size(), model.discriminator.params(), &hasher);
  const std::string id = hasher.hex16();
  if (!ci.id.empty() && ci.id != id) throw ValidationError("parameter blobs do not match the recorded checkpoint id", "id");
  ci.id = id;
  if (info) *info = ci;
  return model;
}

UNetGenerator<float> load_generator(const fs::path& dir, CheckpointInfo* info) {
  const json m = read_manifest(dir);
  CheckpointInfo ci = info_from(m);
  UNetGenerator<float> g(ci.generator, 0);
  load_into(dir, m.at("params"), 0, g.params(), nullptr);
  if (info) *info = ci;
  return g;
}

}  // namespace s2t::nn
