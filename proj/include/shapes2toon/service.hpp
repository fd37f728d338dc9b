#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "shapes2toon/nn/checkpoint.hpp"
#include "shapes2toon/shape.hpp"

namespace s2t::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path checkpoint;   // SHAPES2TOON_CKPT overrides when set
  std::filesystem::path collection;   // corpus directory behind /api/random
  std::size_t max_body_bytes = 4u << 20;
  std::uint64_t dropout_seed = 0;     // default inference noise
  bool allow_request_seed = true;     // ?seed= on /api/infer
  int workers = 2;

  void validate() const;
  // Applies SHAPES2TOON_CKPT if present in the environment.
  void apply_environment();
};

struct Request {
  std::string method = "GET";
  std::string path = "/";
  std::string content_type;
  std::string body;
  std::map<std::string, std::string> query;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct Sample {
  std::string id;
  shape::ShapeLayout layout;
};

// Loads every layout document of a corpus directory, in manifest order.
std::vector<Sample> load_collection(const std::filesystem::path& corpus_dir);

std::string base64_encode(const std::string& bytes);

// Request handling is independent of the socket server so it can be driven
// directly. Handlers never modify the loaded model.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();

  // Throws when the checkpoint cannot be loaded.
  void load_model(const std::filesystem::path& checkpoint);
  void set_model(nn::UNetGenerator<float> generator, std::string checkpoint_id);
  void set_collection(std::vector<Sample> samples);

  bool ready() const { return generator_ != nullptr; }
  const ServiceConfig& config() const { return cfg_; }
  const std::string& checkpoint_id() const { return checkpoint_id_; }
  std::size_t collection_size() const { return collection_.size(); }

  Response handle(const Request& req) const;
  Response infer(const Request& req) const;
  Response random(const Request& req) const;
  Response healthz() const;

  // SHA-256 over the loaded parameter values.
  std::string parameter_checksum() const;

  // Blocking. `on_listening` receives the bound port.
  void serve(const std::function<void(int)>& on_listening = {});
  void stop();

 private:
  RasterImage generate(const RasterImage& source, std::uint64_t seed) const;

  ServiceConfig cfg_;
  std::unique_ptr<nn::UNetGenerator<float>> generator_;
  std::string checkpoint_id_;
  std::vector<Sample> collection_;
  mutable std::mutex rng_mutex_;
  mutable std::uint64_t draw_counter_ = 0;
  struct Server;
  std::unique_ptr<Server> server_;
};

Response error_response(int status, const std::string& message, const std::string& path = {});

}  // namespace s2t::service
