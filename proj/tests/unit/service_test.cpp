#include <chrono>
#include <future>
#include <map>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "shapes2toon/errors.hpp"
#include "shapes2toon/service.hpp"
#include "shapes2toon/toon.hpp"
#include "shapes2toon/train.hpp"
#include "test_support.hpp"

namespace s2t::service {
namespace {

nn::UNetGenerator<float> small_generator() {
  nn::GeneratorConfig cfg;
  cfg.ng = 4;
  cfg.image_size = 32;
  return nn::UNetGenerator<float>(cfg, 1);
}

std::unique_ptr<Service> ready_service(ServiceConfig cfg = {}) {
  auto s = std::make_unique<Service>(std::move(cfg));
  s->set_model(small_generator(), "abc");
  std::vector<Sample> samples;
  for (int i = 0; i < 4; ++i) samples.push_back({"s" + std::to_string(i), toon::sample_layout(i)});
  s->set_collection(std::move(samples));
  return s;
}

const std::string kLayout = shape::serialize_layout(toon::sample_layout(3));

Request post(const std::string& body, const std::string& type = "application/json") {
  Request r;
  r.method = "POST";
  r.path = "/api/infer";
  r.content_type = type;
  r.body = body;
  return r;
}

RasterImage decode(const std::string& body) {
  return decode_png(std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()));
}

TEST(ServiceTest, HealthReflectsModelState) {
  Service empty(ServiceConfig{});
  EXPECT_EQ(empty.handle({"GET", "/healthz", "", "", {}}).status, 503);
  EXPECT_EQ(empty.handle(post(kLayout)).status, 503);
  const auto s = ready_service();
  EXPECT_EQ(s->handle({"GET", "/healthz", "", "", {}}).status, 200);
}

TEST(ServiceTest, InferFromLayoutMatchesDirectTranslation) {
  const auto s = ready_service();
  const Response r = s->handle(post(kLayout));
  ASSERT_EQ(r.status, 200) << r.body;
  EXPECT_EQ(r.content_type, "image/png");
  const RasterImage img = decode(r.body);
  const auto expected =
      train::translate(small_generator(), shape::rasterize(toon::sample_layout(3), 32, 32), 0);
  EXPECT_EQ(img, quantize8(expected));
  EXPECT_EQ(s->handle(post(kLayout)).body, r.body);
}

TEST(ServiceTest, InferAcceptsPngBodies) {
  const auto s = ready_service();
  const auto png = encode_png(shape::rasterize(toon::sample_layout(3), 32, 32));
  const std::string body(png.begin(), png.end());
  const Response a = s->handle(post(body, "image/png"));
  ASSERT_EQ(a.status, 200);
  // The signature is enough without a content type.
  EXPECT_EQ(s->handle(post(body, "")).body, a.body);
  const auto expected = train::translate(small_generator(), decode(body), 0);
  EXPECT_EQ(decode(a.body), quantize8(expected));
  EXPECT_EQ(s->handle(post(std::string("\x89PNG\r\n\x1a\nbroken"), "image/png")).status, 400);
}

TEST(ServiceTest, SeedQuerySelectsDropoutNoise) {
  const auto s = ready_service();
  Request a = post(kLayout);
  a.query["seed"] = "5";
  Request b = a;
  b.query["seed"] = "6";
  EXPECT_EQ(s->handle(a).body, s->handle(a).body);
  EXPECT_NE(s->handle(a).body, s->handle(b).body);
  a.query["seed"] = "-1";
  EXPECT_EQ(s->handle(a).status, 400);
  ServiceConfig cfg;
  cfg.allow_request_seed = false;
  const auto locked = ready_service(cfg);
  b.query["seed"] = "6";
  EXPECT_EQ(locked->handle(b).status, 400);
}

TEST(ServiceTest, BadLayoutsReportTheFieldPath) {
  const auto s = ready_service();
  const Response r = s->handle(
      post(R"({"canvas":{"w":256,"h":256},"shapes":[{"kind":"oval","cx":5,"cy":5,"rx":-5,"ry":3}]})"));
  EXPECT_EQ(r.status, 400);
  const auto j = nlohmann::json::parse(r.body);
  EXPECT_EQ(j.at("path"), "shapes[0].rx");
  EXPECT_TRUE(j.contains("error"));
  EXPECT_EQ(s->handle(post("{oops")).status, 400);
  EXPECT_EQ(s->handle(post(R"({"canvas":{"w":256,"h":256},"shapes":[]})")).status, 400);
}

TEST(ServiceTest, OversizeBodyIs413) {
  ServiceConfig cfg;
  cfg.max_body_bytes = 64;
  const auto s = ready_service(cfg);
  EXPECT_EQ(s->handle(post(std::string(65, ' '))).status, 413);
}

TEST(ServiceTest, RoutingErrors) {
  const auto s = ready_service();
  EXPECT_EQ(s->handle({"GET", "/nope", "", "", {}}).status, 404);
  EXPECT_EQ(s->handle({"GET", "/api/infer", "", "", {}}).status, 405);
  EXPECT_EQ(s->handle({"POST", "/api/random", "", "", {}}).status, 405);
}

TEST(ServiceTest, RandomDrawsFromTheCollection) {
  const auto s = ready_service();
  Request r{"GET", "/api/random", "", "", {{"seed", "3"}}};
  const Response a = s->handle(r);
  ASSERT_EQ(a.status, 200) << a.body;
  const auto j = nlohmann::json::parse(a.body);
  EXPECT_EQ(j.at("id").get<std::string>().substr(0, 1), "s");
  EXPECT_NO_THROW(shape::layout_from_json(j.at("layout")));
  EXPECT_FALSE(j.at("image").get<std::string>().empty());
  EXPECT_EQ(s->handle(r).body, a.body);
  Service empty(ServiceConfig{});
  empty.set_model(small_generator(), "x");
  EXPECT_EQ(empty.handle(r).status, 404);
}

TEST(ServiceTest, GarbageBodiesAreRejected) {
  const auto s = ready_service();
  EXPECT_EQ(s->handle(post(R"({"shapes":[]})")).status, 400);
  Rng rng(5);
  std::string junk(300, '\0');
  for (auto& c : junk) c = static_cast<char>(rng.below(256));
  EXPECT_EQ(s->handle(post(junk, "application/octet-stream")).status, 400);
}

TEST(ServiceTest, RandomDrawsAreUniform) {
  const auto s = ready_service();
  std::map<std::string, int> counts;
  for (int i = 0; i < 1000; ++i) {
    Request r{"GET", "/api/random", "", "", {{"seed", std::to_string(i)}}};
    const Response a = s->handle(r);
    ASSERT_EQ(a.status, 200);
    ++counts[nlohmann::json::parse(a.body).at("id").get<std::string>()];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [id, n] : counts) {
    EXPECT_GE(n, 150) << id;
    EXPECT_LE(n, 350) << id;
  }
  Service single(ServiceConfig{});
  single.set_model(small_generator(), "x");
  single.set_collection({{"only", toon::sample_layout(1)}});
  for (int i = 0; i < 5; ++i) {
    const Response a = single.handle({"GET", "/api/random", "", "", {}});
    EXPECT_EQ(nlohmann::json::parse(a.body).at("id"), "only");
  }
}

TEST(ServiceTest, Base64KnownVectors) {
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("f"), "Zg==");
  EXPECT_EQ(base64_encode("foo"), "Zm9v");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
}

TEST(ServiceTest, ConfigValidation) {
  ServiceConfig cfg;
  cfg.port = 70000;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.workers = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_THROW(Service(ServiceConfig{.checkpoint = "/nonexistent/ckpt"}), IoError);
}

TEST(ServiceTest, ConcurrentRequestsDoNotChangeTheModel) {
  const auto s = ready_service();
  const std::string before = s->parameter_checksum();
  const std::string expected = s->handle(post(kLayout)).body;
  std::vector<std::future<std::string>> jobs;
  for (int i = 0; i < 4; ++i)
    jobs.push_back(std::async(std::launch::async, [&] { return s->handle(post(kLayout)).body; }));
  for (auto& j : jobs) EXPECT_EQ(j.get(), expected);
  EXPECT_EQ(s->parameter_checksum(), before);
}

TEST(ServiceHttpTest, ServesOverASocket) {
  ServiceConfig cfg;
  cfg.port = 0;
  cfg.max_body_bytes = 1 << 16;
  auto s = ready_service(cfg);
  std::promise<int> bound;
  std::thread server([&] { s->serve([&](int port) { bound.set_value(port); }); });
  auto fut = bound.get_future();
  ASSERT_EQ(fut.wait_for(std::chrono::seconds(10)), std::future_status::ready);
  const int port = fut.get();

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);
  auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  auto infer = client.Post("/api/infer", kLayout, "application/json");
  ASSERT_TRUE(infer);
  EXPECT_EQ(infer->status, 200);
  EXPECT_EQ(infer->body, s->handle(post(kLayout)).body);
  EXPECT_EQ(infer->get_header_value("Access-Control-Allow-Origin"), "*");

  auto bad = client.Post("/api/infer", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto big = client.Post("/api/infer", std::string(1 << 17, 'x'), "application/json");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);

  auto put = client.Put("/api/infer", kLayout, "application/json");
  ASSERT_TRUE(put);
  EXPECT_EQ(put->status, 405);

  auto random = client.Get("/api/random?seed=2");
  ASSERT_TRUE(random);
  EXPECT_EQ(random->status, 200);
  EXPECT_EQ(random->get_header_value("Content-Type"), "application/json");

  s->stop();
  server.join();
}

}  // namespace
}  // namespace s2t::service
