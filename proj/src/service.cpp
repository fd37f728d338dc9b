#include "shapes2toon/service.hpp"

#include <charconv>
#include <cstdlib>
#include <random>

#include <httplib.h>

#include "shapes2toon/corpus.hpp"
#include "shapes2toon/train.hpp"

namespace s2t::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<std::uint64_t> parse_seed(const std::map<std::string, std::string>& query) {
  const auto it = query.find("seed");
  if (it == query.end()) return std::nullopt;
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ValidationError("seed must be a non-negative integer", "seed");
  return v;
}

bool looks_like_png(const std::string& body) {
  static const char sig[] = {'\x89', 'P', 'N', 'G', '\r', '\n', '\x1a', '\n'};
  return body.size() >= 8 && std::equal(sig, sig + 8, body.begin());
}

std::string png_string(const RasterImage& img) {
  const auto bytes = encode_png(img);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw ValidationError("port out of range", "port");
  if (max_body_bytes == 0) throw ValidationError("max body size must be > 0", "max_body_bytes");
  if (workers < 1) throw ValidationError("workers must be >= 1", "workers");
}

void ServiceConfig::apply_environment() {
  if (const char* env = std::getenv("SHAPES2TOON_CKPT"); env != nullptr && *env != '\0') checkpoint = env;
}

std::string base64_encode(const std::string& bytes) { return httplib::detail::base64_encode(bytes); }

Response error_response(int status, const std::string& message, const std::string& path) {
  json j = {{"error", message}};
  if (!path.empty()) j["path"] = path;
  return {status, "application/json", j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)};
}

std::vector<Sample> load_collection(const fs::path& corpus_dir) {
  const auto manifest = corpus::CorpusManifest::load(corpus_dir);
  std::vector<Sample> out;
  for (const auto& e : manifest.entries) {
    const fs::path p = corpus::layout_path(corpus_dir, e.id);
    if (!fs::exists(p)) continue;
    out.push_back({e.id, shape::parse_layout(read_text(p))});
  }
  return out;
}

struct Service::Server {
  httplib::Server http;
};

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)), server_(std::make_unique<Server>()) {
  cfg_.validate();
  if (!cfg_.checkpoint.empty()) load_model(cfg_.checkpoint);
  if (!cfg_.collection.empty()) set_collection(load_collection(cfg_.collection));
}

Service::~Service() = default;

void Service::load_model(const fs::path& checkpoint) {
  nn::CheckpointInfo info;
  auto g = nn::load_generator(checkpoint, &info);
  set_model(std::move(g), info.id);
}

void Service::set_model(nn::UNetGenerator<float> generator, std::string checkpoint_id) {
  generator_ = std::make_unique<nn::UNetGenerator<float>>(std::move(generator));
  checkpoint_id_ = std::move(checkpoint_id);
}

void Service::set_collection(std::vector<Sample> samples) { collection_ = std::move(samples); }

RasterImage Service::generate(const RasterImage& source, std::uint64_t seed) const {
  return train::translate(*generator_, source, seed);
}

Response Service::healthz() const {
  if (!ready()) return {503, "text/plain", "model not loaded"};
  return {200, "text/plain", "ok"};
}

Response Service::infer(const Request& req) const {
  if (req.body.size() > cfg_.max_body_bytes)
    return error_response(413, "request body exceeds " + std::to_string(cfg_.max_body_bytes) + " bytes");
  if (!ready()) return error_response(503, "model not loaded");
  try {
    std::uint64_t seed = cfg_.dropout_seed;
    if (const auto s = parse_seed(req.query)) {
      if (!cfg_.allow_request_seed) return error_response(400, "per-request seeds are disabled", "seed");
      seed = *s;
    }
    const int size = generator_->config().image_size;
    RasterImage source;
    const bool png = req.content_type.rfind("image/png", 0) == 0 || looks_like_png(req.body);
    if (png) {
      try {
        source = decode_png(std::span(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()));
      } catch (const Error& e) {
        return error_response(400, std::string("invalid PNG: ") + e.what());
      }
    } else {
      const shape::ShapeLayout layout = shape::parse_layout(req.body);
      layout.validate(true);
      source = shape::rasterize(layout, size, size);
    }
    return {200, "image/png", png_string(generate(source, seed))};
  } catch (const ValidationError& e) {
    return error_response(400, e.what(), e.path());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

Response Service::random(const Request& req) const {
  if (collection_.empty()) return error_response(404, "sample collection is empty");
  if (!ready()) return error_response(503, "model not loaded");
  try {
    std::uint64_t draw_seed;
    if (const auto s = parse_seed(req.query)) {
      draw_seed = *s;
    } else {
      std::lock_guard lock(rng_mutex_);
      static const std::uint64_t boot = std::random_device{}();
      draw_seed = derive_seed(boot, draw_counter_++);
    }
    Rng rng(draw_seed);
    const Sample& s = collection_[rng.below(collection_.size())];
    const int size = generator_->config().image_size;
    const RasterImage out = generate(shape::rasterize(s.layout, size, size), cfg_.dropout_seed);
    const json j = {{"id", s.id}, {"layout", shape::layout_to_json(s.layout)}, {"image", base64_encode(png_string(out))}};
    return {200, "application/json", j.dump()};
  } catch (const ValidationError& e) {
    return error_response(400, e.what(), e.path());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

Response Service::handle(const Request& req) const {
  if (req.path == "/healthz") {
    if (req.method != "GET") return error_response(405, "method not allowed", req.path);
    return healthz();
  }
  if (req.path == "/api/infer") {
    if (req.method != "POST") return error_response(405, "method not allowed", req.path);
    return infer(req);
  }
  if (req.path == "/api/random") {
    if (req.method != "GET") return error_response(405, "method not allowed", req.path);
    return random(req);
  }
  return error_response(404, "no such endpoint", req.path);
}

std::string Service::parameter_checksum() const {
  if (!generator_) return {};
  std::vector<std::uint8_t> bytes;
  for (const auto& p : generator_->params().items()) {
    const auto* b = reinterpret_cast<const std::uint8_t*>(p.value.data());
    bytes.insert(bytes.end(), b, b + 4 * p.value.numel());
  }
  return sha256_hex(bytes);
}

void Service::serve(const std::function<void(int)>& on_listening) {
  auto& http = server_->http;
  const int workers = cfg_.workers;
  http.new_task_queue = [workers] { return new httplib::ThreadPool(static_cast<std::size_t>(workers)); };
  http.set_payload_max_length(cfg_.max_body_bytes);

  auto bridge = [this](const httplib::Request& hreq, httplib::Response& hres) {
    Request req;
    req.method = hreq.method;
    req.path = hreq.path;
    req.content_type = hreq.get_header_value("Content-Type");
    req.body = hreq.body;
    for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
    const Response r = handle(req);
    hres.status = r.status;
    hres.set_header("Access-Control-Allow-Origin", "*");
    hres.set_content(r.body, r.content_type);
  };
  http.Get(".*", bridge);
  http.Post(".*", bridge);
  http.Put(".*", bridge);
  http.Delete(".*", bridge);
  http.Patch(".*", bridge);
  http.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string msg = res.status == 413 ? "request body too large" : "request failed";
    const Response r = error_response(res.status, msg, req.path);
    res.set_content(r.body, r.content_type);
  });

  int port = cfg_.port;
  if (port == 0) {
    port = http.bind_to_any_port(cfg_.host);
  } else if (!http.bind_to_port(cfg_.host, port)) {
    port = -1;
  }
  if (port < 0) throw IoError("cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
  if (on_listening) on_listening(port);
  http.listen_after_bind();
}

void Service::stop() {
  if (server_) server_->http.stop();
}

}  // namespace s2t::service
