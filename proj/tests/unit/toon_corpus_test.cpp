#include <filesystem>

#include <gtest/gtest.h>

#include "shapes2toon/corpus.hpp"
#include "shapes2toon/errors.hpp"
#include "shapes2toon/toon.hpp"
#include "test_support.hpp"

namespace s2t::toon {
namespace {

using shape::ShapeKind;

TEST(ToonLayoutTest, SampledLayoutHasMouseStructure) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto l = sample_layout(seed);
    EXPECT_NO_THROW(l.validate());
    ASSERT_EQ(l.shapes.size(), 5u);
    EXPECT_EQ(l.shapes[0].kind, ShapeKind::circle);
    EXPECT_EQ(l.shapes[1].kind, ShapeKind::circle);
    EXPECT_EQ(l.shapes[2].kind, ShapeKind::circle);
    EXPECT_EQ(l.shapes[3].kind, ShapeKind::oval);
    EXPECT_EQ(l.shapes[4].kind, ShapeKind::oval);
    // Ears are smaller than the head and sit above its center.
    EXPECT_LT(l.shapes[1].rx, l.shapes[0].rx);
    EXPECT_LT(l.shapes[2].rx, l.shapes[0].rx);
    EXPECT_LT(l.shapes[1].cy, l.shapes[0].cy);
    EXPECT_LT(l.shapes[2].cy, l.shapes[0].cy);
    EXPECT_LT(l.shapes[1].cx, l.shapes[2].cx);
  }
}

TEST(ToonLayoutTest, SamplingIsDeterministic) {
  EXPECT_EQ(sample_layout(42), sample_layout(42));
  EXPECT_NE(sample_layout(42), sample_layout(43));
}

TEST(ToonLayoutTest, RolesFollowSize) {
  shape::ShapeLayout l;
  l.shapes.push_back(shape::ShapePrimitive::circle(60, 60, 20));
  l.shapes.push_back(shape::ShapePrimitive::oval(128, 140, 40, 30));
  l.shapes.push_back(shape::ShapePrimitive::circle(128, 128, 70));
  l.shapes.push_back(shape::ShapePrimitive::oval(128, 170, 20, 10));
  const FaceRoles roles = identify_roles(l);
  EXPECT_EQ(roles.head, 2u);
  ASSERT_EQ(roles.ears.size(), 1u);
  EXPECT_EQ(roles.ears[0], 0u);
  ASSERT_TRUE(roles.face.has_value());
  EXPECT_EQ(*roles.face, 1u);
  ASSERT_EQ(roles.muzzles.size(), 1u);
  EXPECT_EQ(roles.muzzles[0], 3u);
}

TEST(ToonRenderTest, HeadIsFilledAndBackgroundIsWhite) {
  const auto l = sample_layout(1);
  const ToonStyle style = ToonStyle::mouse();
  const RasterImage img = render_toon(l, style, 256, 256);
  EXPECT_EQ(img.channels(), 3);
  EXPECT_EQ(img.rgb(2, 2), style.background);
  // A point inside an ear but outside the head takes the ear fill.
  const auto& ear = l.shapes[1];
  const auto& head = l.shapes[0];
  const double dx = ear.cx - head.cx;
  const double dy = ear.cy - head.cy;
  const double len = std::hypot(dx, dy);
  const int x = static_cast<int>(ear.cx + dx / len * ear.rx * 0.5);
  const int y = static_cast<int>(ear.cy + dy / len * ear.rx * 0.5);
  const Rgb c = img.rgb(x, y);
  EXPECT_NEAR(c.r, style.ear_fill.r, 0.02);
  EXPECT_NEAR(c.g, style.ear_fill.g, 0.02);
  EXPECT_NEAR(c.b, style.ear_fill.b, 0.02);
}

TEST(ToonRenderTest, RenderingIsDeterministic) {
  const auto l = sample_layout(9);
  EXPECT_EQ(render_toon(l, ToonStyle::mouse(), 128, 128), render_toon(l, ToonStyle::mouse(), 128, 128));
}

TEST(ToonRenderTest, PairSourceIsTheRasterizedLayout) {
  const auto l = sample_layout(4);
  const auto pair = make_pair(l, ToonStyle::mouse(), 64);
  EXPECT_EQ(pair.source, shape::rasterize(l, 64, 64, 3));
  EXPECT_EQ(pair.target.width(), 64);
}

TEST(CorpusTest, JoinedRoundTrip) {
  const auto pair = make_pair(sample_layout(2), ToonStyle::mouse(), 32);
  const RasterImage joined = pair.joined();
  EXPECT_EQ(joined.width(), 64);
  EXPECT_EQ(joined.height(), 32);
  const auto back = corpus::PairedSample::from_joined(joined);
  EXPECT_EQ(back.source, pair.source);
  EXPECT_EQ(back.target, pair.target);
  EXPECT_THROW(corpus::PairedSample::from_joined(RasterImage(33, 16, 3)), ValidationError);
}

TEST(CorpusTest, SameSeedBuildsAreByteIdentical) {
  testing::TempDir a("corpus-a"), b("corpus-b");
  const auto ma = build_corpus(6, 77, a.path(), {.image_size = 64});
  const auto mb = build_corpus(6, 77, b.path(), {.image_size = 64});
  ASSERT_EQ(ma.size(), 6u);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    EXPECT_EQ(ma.entries[i].sha256, mb.entries[i].sha256);
    EXPECT_EQ(read_file(corpus::pair_path(a.path(), ma.entries[i].id)),
              read_file(corpus::pair_path(b.path(), mb.entries[i].id)));
    EXPECT_EQ(read_text(corpus::layout_path(a.path(), ma.entries[i].id)),
              read_text(corpus::layout_path(b.path(), mb.entries[i].id)));
  }
  EXPECT_EQ(read_text(a.path() / "manifest.json"), read_text(b.path() / "manifest.json"));
}

TEST(CorpusTest, ManifestRoundTripsThroughDisk) {
  testing::TempDir dir("manifest");
  const auto m = build_corpus(3, 5, dir.path(), {.image_size = 32});
  const auto loaded = corpus::CorpusManifest::load(dir.path());
  EXPECT_EQ(loaded.to_json(), m.to_json());
  const auto pair = corpus::load_pair(dir.path(), m.entries[1].id);
  EXPECT_EQ(pair.base_id, m.entries[1].base_id);
  EXPECT_EQ(pair.source.width(), 32);
  EXPECT_EQ(sha256_hex(read_file(corpus::pair_path(dir.path(), m.entries[1].id))), m.entries[1].sha256);
}

TEST(CorpusTest, UnwritableLocationIsAnIoError) {
  testing::TempDir dir("blocked");
  write_text(dir.path() / "file", "x");
  EXPECT_THROW(build_corpus(1, 0, dir.path() / "file" / "sub", {.image_size = 32}), IoError);
}

TEST(CorpusTest, InvalidArgumentsAreRejected) {
  testing::TempDir dir("bad");
  EXPECT_THROW(build_corpus(0, 0, dir.path()), ValidationError);
  CorpusOptions opts;
  opts.styles.clear();
  EXPECT_THROW(build_corpus(1, 0, dir.path(), opts), ValidationError);
}

}  // namespace
}  // namespace s2t::toon
