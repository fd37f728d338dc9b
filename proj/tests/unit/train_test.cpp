#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "shapes2toon/augment.hpp"
#include "shapes2toon/errors.hpp"
#include "shapes2toon/plot.hpp"
#include "shapes2toon/toon.hpp"
#include "shapes2toon/train.hpp"
#include "test_support.hpp"

namespace s2t::train {
namespace {

corpus::CorpusManifest grouped_manifest(int bases, int per_base) {
  corpus::CorpusManifest m;
  for (int b = 0; b < bases; ++b)
    for (int v = 0; v < per_base; ++v)
      m.entries.push_back({"b" + std::to_string(b) + "_" + std::to_string(v), "b" + std::to_string(b), 0, "", {}});
  return m;
}

std::vector<corpus::PairedSample> toy_pairs(int n, int size) {
  std::vector<corpus::PairedSample> out;
  for (int i = 0; i < n; ++i) {
    auto p = toon::make_pair(toon::sample_layout(static_cast<std::uint64_t>(i)), toon::ToonStyle::mouse(), size);
    p.id = "p" + std::to_string(i);
    p.base_id = p.id;
    out.push_back(std::move(p));
  }
  return out;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.image_size = 32;
  cfg.ng = 4;
  cfg.nd = 4;
  cfg.epochs = 2;
  cfg.seed = 3;
  return cfg;
}

TEST(SplitTest, GroupsNeverStraddleTheSplit) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = grouped_manifest(37, 7);
    const Split s = split_corpus(m, 0.8, seed);
    EXPECT_EQ(s.train.size() + s.test.size(), m.size());
    std::set<std::string> train_bases, test_bases;
    for (const auto& id : s.train) train_bases.insert(m.find(id).base_id);
    for (const auto& id : s.test) test_bases.insert(m.find(id).base_id);
    for (const auto& b : train_bases) EXPECT_EQ(test_bases.count(b), 0u);
    // Greedy group assignment lands within half a group of the target.
    const double target = std::round(m.size() * 0.8);
    EXPECT_LE(std::abs(static_cast<double>(s.train.size()) - target), 3.5);
  }
}

TEST(SplitTest, IsDeterministicPerSeed) {
  const auto m = grouped_manifest(20, 3);
  EXPECT_EQ(split_corpus(m, 0.7, 5).train, split_corpus(m, 0.7, 5).train);
  EXPECT_NE(split_corpus(m, 0.7, 5).train, split_corpus(m, 0.7, 6).train);
}

TEST(SplitTest, HundredBasesOfFifteenCannotHitAnOddTarget) {
  const auto m = grouped_manifest(100, 15);
  const Split s = split_corpus(m, 0.958, 0);
  EXPECT_EQ(s.train.size() % 15, 0u);
  EXPECT_EQ(s.train.size(), 1440u);
  EXPECT_EQ(s.test.size(), 60u);
  EXPECT_TRUE(s.warning.empty());
}

TEST(SplitTest, DegenerateCorpusWarns) {
  const Split s = split_corpus(grouped_manifest(4, 15), 0.958, 0);
  EXPECT_TRUE(s.test.empty());
  EXPECT_FALSE(s.warning.empty());
  EXPECT_THROW(split_corpus(grouped_manifest(4, 1), 1.0, 0), ValidationError);
  EXPECT_THROW(split_corpus(corpus::CorpusManifest{}, 0.5, 0), ValidationError);
}

TEST(LossLogTest, CsvRoundTripIsExact) {
  LossLog log;
  Rng rng(1);
  for (int i = 1; i <= 50; ++i) log.records.push_back({i, rng.normal(), rng.uniform(), rng.uniform() * 1e-7});
  const std::string csv = log.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,loss_g_adv,loss_d,loss_l1");
  EXPECT_EQ(LossLog::from_csv(csv), log);
  EXPECT_THROW(LossLog::from_csv("step,loss_g_adv,loss_d,loss_l1\n1,2,x,4\n"), ValidationError);
  EXPECT_THROW(LossLog::from_csv("a,b\n"), ValidationError);
}

TEST(DataTest, NonSquareImagesAreLetterboxed) {
  RasterImage img(40, 20, 3, 0.f);
  const RasterImage out = fit_image(img, 20);
  EXPECT_EQ(out.width(), 20);
  EXPECT_EQ(out.height(), 20);
  EXPECT_FLOAT_EQ(out.at(10, 1, 0), 1.f);
  EXPECT_FLOAT_EQ(out.at(10, 10, 0), 0.f);
  RasterImage gray(16, 16, 1, 0.25f);
  EXPECT_EQ(fit_image(gray, 16).channels(), 3);
}

TEST(TrainerTest, SameSeedGivesIdenticalLossLogs) {
  const auto pairs = toy_pairs(3, 32);
  auto run = [&] {
    PairSource data(pairs, 32);
    Trainer t(tiny_config());
    t.run(data);
    return t.log();
  };
  const LossLog a = run();
  const LossLog b = run();
  ASSERT_EQ(a.records.size(), 6u);
  EXPECT_EQ(a, b);
  for (const auto& r : a.records) EXPECT_TRUE(r.finite());
}

TEST(TrainerTest, DifferentSeedsDiffer) {
  const auto pairs = toy_pairs(2, 32);
  PairSource d1(pairs, 32), d2(pairs, 32);
  auto c1 = tiny_config(), c2 = tiny_config();
  c2.seed = 4;
  Trainer t1(c1), t2(c2);
  t1.run(d1);
  t2.run(d2);
  EXPECT_NE(t1.log(), t2.log());
}

// One small generator step along the objective gradient reduces it on the
// same batch and dropout mask.
TEST(TrainerTest, SmallGeneratorStepDescends) {
  const auto pairs = toy_pairs(1, 32);
  nn::GeneratorConfig gc;
  gc.ng = 4;
  gc.image_size = 32;
  nn::DiscriminatorConfig dc;
  dc.nd = 4;
  nn::Pix2Pix<float> model(gc, dc, 8);
  auto g = model.generator.cast<double>();
  auto d = model.discriminator.cast<double>();
  const auto src = nn::image_to_tensor<double>(pairs[0].source);
  const auto tgt = nn::image_to_tensor<double>(pairs[0].target);
  auto objective = [&](bool backward) {
    nn::Tape<double> tape;
    Rng drop(4);
    auto s = tape.constant(src);
    auto fake = g.forward(tape, s, &drop);
    auto loss = nn::pix2pix_objective(d.infer(tape, s, fake), fake, tape.constant(tgt), nn::LossWeights{});
    const double v = loss.value().item();
    if (backward) tape.backward(loss);
    return v;
  };
  const double before = objective(true);
  nn::Adam<double> opt(g.params(), {1e-5, 0.5, 0.999, 1e-8});
  opt.step();
  EXPECT_LT(objective(false), before);
}

TEST(TrainerTest, TrainCorpusWritesArtifacts) {
  testing::TempDir base("train-base"), aug("train-aug"), out("train-out");
  const auto m = toon::build_corpus(3, 1, base.path(), {.image_size = 32});
  augment::AugmentationPlan plan;
  plan.per_base = 2;
  augment::expand_corpus(base.path(), m, plan, aug.path());
  auto cfg = tiny_config();
  cfg.epochs = 1;
  cfg.train_fraction = 0.6;
  int steps = 0;
  const auto result = train_corpus(aug.path(), cfg, out.path(), [&](const LossRecord&) { ++steps; });
  EXPECT_EQ(static_cast<std::size_t>(steps), result.split.train.size());
  EXPECT_TRUE(std::filesystem::exists(out / "split.json"));
  EXPECT_TRUE(std::filesystem::exists(out / "train_config.json"));
  EXPECT_TRUE(std::filesystem::exists(out / "checkpoint" / "manifest.json"));
  EXPECT_EQ(LossLog::load(out / "losses.csv"), result.log);
  EXPECT_EQ(nn::read_checkpoint_info(out / "checkpoint").id, result.checkpoint.id);
  EXPECT_EQ(result.checkpoint.step, steps);
}

TEST(TrainerTest, ConfigValidation) {
  TrainConfig cfg;
  cfg.lr = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.image_size = 4;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(PlotTest, WritesSvgAndPng) {
  testing::TempDir dir("plot");
  LossLog log;
  for (int i = 1; i <= 20; ++i) log.records.push_back({i, 1.0 / i, 0.5, 0.1 * i});
  const std::string svg = plot::loss_curves_svg(log);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("L1"), std::string::npos);
  plot::write_loss_curves(log, dir / "l.png");
  const RasterImage img = read_png(dir / "l.png");
  EXPECT_EQ(img.width(), 960);
  EXPECT_THROW(plot::write_loss_curves(log, dir / "l.jpg"), ValidationError);
}

}  // namespace
}  // namespace s2t::train
