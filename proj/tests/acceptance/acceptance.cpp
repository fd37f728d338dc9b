// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--criterion NAME] [--work DIR] [--keep]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "shapes2toon/augment.hpp"
#include "shapes2toon/fid.hpp"
#include "shapes2toon/fit.hpp"
#include "shapes2toon/nn/checkpoint.hpp"
#include "shapes2toon/nn/losses.hpp"
#include "shapes2toon/toon.hpp"
#include "shapes2toon/train.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace s2t;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects named sub-checks; the criterion passes when all of them do.
class Report {
 public:
  void check(const std::string& name, bool ok, const std::string& detail) {
    checks_.push_back({name, ok, detail});
    std::cerr << "  " << (ok ? "ok   " : "FAIL ") << name << ": " << detail << "\n";
  }
  bool passed() const {
    for (const auto& c : checks_)
      if (!c.ok) return false;
    return !checks_.empty();
  }
  std::string summary() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& c : checks_) {
      if (!first) os << "; ";
      first = false;
      os << c.name << (c.ok ? " ok" : " FAILED") << " (" << c.detail << ")";
    }
    return os.str();
  }

 private:
  struct Check {
    std::string name;
    bool ok;
    std::string detail;
  };
  std::vector<Check> checks_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path g_work;

fs::path work_dir(const std::string& name) {
  const fs::path p = g_work / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// --- gradient correctness -----------------------------------------------------

struct TinyNet {
  std::string desc;
  nn::ParameterSet<double> params;
  std::function<nn::Var<double>(nn::Tape<double>&)> loss;
};

// conv -> norm -> leaky -> conv^T -> tanh -> [dropout] -> concat(input) -> conv,
// scored with the pix2pix objective. Shapes and widths come from the seed.
std::unique_ptr<TinyNet> random_net(std::uint64_t seed) {
  auto net = std::make_unique<TinyNet>();
  Rng rng(seed);
  const int cin = 1 + static_cast<int>(rng.below(3));
  const int c1 = 2 + static_cast<int>(rng.below(3));
  const int size = 4 + 2 * static_cast<int>(rng.below(3));
  const bool strided = rng.bernoulli(0.5);
  const bool use_dropout = rng.bernoulli(0.5);
  const double lambda = rng.uniform(1.0, 100.0);
  const nn::ConvGeometry down = strided ? nn::ConvGeometry{4, 2, 1} : nn::ConvGeometry{3, 1, 1};
  const nn::ConvGeometry up = strided ? nn::ConvGeometry{4, 2, 1} : nn::ConvGeometry{3, 1, 1};
  auto add = [&](const std::string& name, nn::Shape shape, double lo, double hi) -> nn::Parameter<double>& {
    auto& p = net->params.add(name, shape);
    p.value = testing::random_tensor(shape, rng, lo, hi);
    return p;
  };
  auto& w1 = add("w1", {c1, cin, down.kernel, down.kernel}, -0.5, 0.5);
  auto& b1 = add("b1", {c1}, -0.5, 0.5);
  auto& gamma = add("gamma", {c1}, 0.5, 1.5);
  auto& beta = add("beta", {c1}, -0.5, 0.5);
  auto& w2 = add("w2", {c1, cin, up.kernel, up.kernel}, -0.5, 0.5);
  auto& b2 = add("b2", {cin}, -0.5, 0.5);
  auto& w3 = add("w3", {1, 2 * cin, 3, 3}, -0.5, 0.5);
  auto& b3 = add("b3", {1}, -0.5, 0.5);
  const auto x = testing::random_tensor({1, cin, size, size}, rng, 0.0, 1.0);
  const auto target = testing::random_tensor({1, cin, size, size}, rng, -1.0, 1.0);
  const std::uint64_t drop_seed = rng.next();
  net->desc = "cin=" + std::to_string(cin) + " c1=" + std::to_string(c1) + " size=" + std::to_string(size) +
              (strided ? " strided" : "") + (use_dropout ? " dropout" : "");
  net->loss = [=, &w1, &b1, &gamma, &beta, &w2, &b2, &w3, &b3](nn::Tape<double>& t) {
    auto in = t.constant(x);
    auto h = nn::conv2d(in, t.parameter(w1), t.parameter(b1), down);
    h = nn::leaky_relu(nn::instance_norm(h, t.parameter(gamma), t.parameter(beta)), 0.2);
    auto g = nn::tanh(nn::conv_transpose2d(h, t.parameter(w2), t.parameter(b2), up));
    if (use_dropout) {
      Rng mask(drop_seed);
      g = nn::dropout(g, 0.5, mask);
    }
    auto logits = nn::conv2d(nn::concat_channels(g, in), t.parameter(w3), t.parameter(b3), nn::ConvGeometry{3, 1, 1});
    return nn::pix2pix_objective(logits, g, t.constant(target), nn::LossWeights{lambda});
  };
  return net;
}

Report gradient_correctness() {
  Report rep;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0;
  int nets = 0;
  std::size_t max_params = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto net = random_net(seed);
    max_params = std::max(max_params, net->params.scalar_count());
    const auto r = testing::check_gradients(testing::param_ptrs(net->params), net->loss);
    std::cerr << "  net " << seed << " (" << net->desc << ", " << net->params.scalar_count()
              << " params): max rel err " << r.max_rel_error << "\n";
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    ++nets;
  }
  {
    nn::GeneratorConfig cfg;
    cfg.ng = 2;
    cfg.image_size = 8;
    nn::UNetGenerator<double> g(cfg, 7);
    Rng rng(7);
    const auto x = testing::random_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);
    const auto y = testing::random_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);
    max_params = std::max(max_params, g.params().scalar_count());
    const auto r = testing::check_gradients(testing::param_ptrs(g.params()), [&](nn::Tape<double>& t) {
      Rng drop(3);
      return nn::l1_loss(g.forward(t, t.constant(x), &drop), t.constant(y));
    });
    std::cerr << "  tiny U-Net (" << g.params().scalar_count() << " params): max rel err " << r.max_rel_error << "\n";
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    ++nets;
  }
  double patchgan = 0.0;
  {
    nn::DiscriminatorConfig cfg;
    cfg.nd = 1;
    nn::PatchGan<double> d(cfg, 8);
    Rng rng(8);
    const auto s = testing::random_tensor({1, 3, 32, 32}, rng, 0.0, 1.0);
    const auto tg = testing::random_tensor({1, 3, 32, 32}, rng, 0.0, 1.0);
    const auto r = testing::check_gradients(testing::param_ptrs(d.params()), [&](nn::Tape<double>& t) {
      auto real = d.forward(t, t.constant(s), t.constant(tg));
      auto fake = d.forward(t, t.constant(s), t.constant(s));
      return nn::discriminator_loss(real, fake);
    });
    std::cerr << "  tiny PatchGAN, not gated (" << d.params().scalar_count() << " params): max rel err "
              << r.max_rel_error << " at " << r.worst << "\n";
    patchgan = r.max_rel_error;
  }
  const double elapsed = seconds_since(t0);
  rep.check("networks", nets >= 5 && max_params <= 1000,
            std::to_string(nets) + " nets, largest " + std::to_string(max_params) + " params");
  rep.check("max_rel_error<=1e-6", worst <= 1e-6, fmt("%.3g", worst) + " over " + std::to_string(checked) + " scalars");
  rep.check("runtime<60s", elapsed < 60.0, fmt("%.1fs", elapsed));
  std::cerr << "  info: 5-layer PatchGAN max rel err " << patchgan << " (truncation, shrinks as eps^2)\n";
  return rep;
}

// --- loss oracles ---------------------------------------------------------------

Report loss_oracles() {
  Report rep;
  nn::Tape<double> t;
  auto zero = t.constant(nn::Tensor<double>({1, 1, 30, 30}, 0.0));
  const double d0 = nn::gan_loss(zero, zero).loss_d.value().item();
  rep.check("gan_loss(0)=2ln2", std::abs(d0 - 2.0 * std::numbers::ln2) <= 1e-9,
            fmt("%.12f", d0) + " vs " + fmt("%.12f", 2.0 * std::numbers::ln2));

  auto a = t.constant(nn::Tensor<double>({1, 1, 2, 2}, std::vector<double>{0, 1, 2, 3}));
  auto ones = t.constant(nn::Tensor<double>({1, 1, 2, 2}, 1.0));
  auto half = t.constant(nn::Tensor<double>({1, 1, 2, 2}, 0.5));
  auto mixed = t.constant(nn::Tensor<double>({1, 1, 2, 2}, std::vector<double>{0.25, 0.75, 0.25, 0.75}));
  const double l1a = nn::l1_loss(a, ones).value().item();
  const double l1b = nn::l1_loss(a, a).value().item();
  const double l1c = nn::l1_loss(half, mixed).value().item();
  rep.check("l1 exact", l1a == 1.0 && l1b == 0.0 && l1c == 0.25,
            fmt("%.17g", l1a) + ", " + fmt("%.17g", l1b) + ", " + fmt("%.17g", l1c));

  const double z = -std::log(std::expm1(0.7));
  auto logits = t.constant(nn::Tensor<double>({1, 1, 2, 2}, z));
  const double obj = nn::pix2pix_objective(logits, half, mixed, nn::LossWeights{100.0}).value().item();
  rep.check("objective=25.7", std::abs(obj - 25.7) <= 1e-9, fmt("%.12f", obj));
  return rep;
}

// --- architecture contracts ---------------------------------------------------------

Report architecture_contracts() {
  Report rep;
  std::string shapes;
  bool same = true;
  for (int size : {64, 128, 256}) {
    nn::GeneratorConfig cfg;
    cfg.ng = 2;
    cfg.image_size = size;
    nn::UNetGenerator<float> g(cfg, 1);
    nn::Tape<float> t(false);
    auto y = g.infer(t, t.constant(nn::Tensor<float>({1, 3, size, size}, 0.5f)), nullptr);
    same = same && y.shape() == nn::Shape{1, 3, size, size};
    shapes += (shapes.empty() ? "" : " ") + nn::shape_str(y.shape());
  }
  rep.check("unet shape", same, shapes);
  const nn::DiscriminatorConfig dcfg;
  rep.check("receptive field=70", dcfg.receptive_field() == 70, std::to_string(dcfg.receptive_field()));
  nn::DiscriminatorConfig small = dcfg;
  small.nd = 2;
  nn::PatchGan<float> d(small, 1);
  nn::Tape<float> t(false);
  auto img = t.constant(nn::Tensor<float>({1, 3, 256, 256}, 0.5f));
  const auto grid = d.infer(t, img, img).shape();
  rep.check("256->30x30", grid == nn::Shape{1, 1, 30, 30} && dcfg.output_size(256) == 30, nn::shape_str(grid));
  return rep;
}

// --- overfit capacity -------------------------------------------------------------

Report overfit_capacity() {
  Report rep;
  const auto t0 = Clock::now();
  std::vector<corpus::PairedSample> pairs;
  for (int i = 0; i < 8; ++i) {
    auto p = toon::make_pair(toon::sample_layout(derive_seed(2024, i)), toon::ToonStyle::mouse(), 64);
    p.id = "o" + std::to_string(i);
    p.base_id = p.id;
    pairs.push_back(std::move(p));
  }
  train::TrainConfig cfg;
  cfg.image_size = 64;
  cfg.epochs = 200;
  cfg.seed = 17;
  train::PairSource data(pairs, 64);
  train::Trainer trainer(cfg);
  const nn::UNetGenerator<float> initial = trainer.model().generator;
  trainer.run(data, [&](const train::LossRecord& r) {
    if (r.step % 200 == 0)
      std::cerr << "  step " << r.step << " l1=" << r.loss_l1 << " d=" << r.loss_d << " g=" << r.loss_g_adv << " ("
                << fmt("%.0fs", seconds_since(t0)) << ")\n";
  });
  const double train_time = seconds_since(t0);
  const fid::RandomConvEmbedder extractor;
  train::PairSource eval_a(pairs, 64), eval_b(pairs, 64);
  const auto trained = fid::evaluate_model(trainer.model().generator, eval_a, extractor);
  const auto random = fid::evaluate_model(initial, eval_b, extractor);
  bool finite = true;
  for (const auto& r : trainer.log().records) finite = finite && r.finite();
  rep.check("losses finite", finite, std::to_string(trainer.log().records.size()) + " steps");
  rep.check("train L1<0.08", trained.mean_l1 < 0.08, fmt("%.4f", trained.mean_l1));
  rep.check("FID trained<random", trained.fid < random.fid, fmt("%.4g", trained.fid) + " vs " + fmt("%.4g", random.fid));
  rep.check("runtime<=15min", train_time <= 900.0, fmt("%.0fs", train_time));
  return rep;
}

// --- end-to-end ---------------------------------------------------------------------

Report end_to_end() {
  Report rep;
  const auto t0 = Clock::now();
  const fs::path root = work_dir("e2e");
  const auto base = toon::build_corpus(100, 7, root / "base");
  augment::AugmentationPlan plan;
  plan.rng_seed = 7;
  const auto aug = augment::expand_corpus(root / "base", base, plan, root / "augmented");
  rep.check("pairs=1500", aug.size() == 1500, std::to_string(aug.size()));
  std::cerr << "  corpus ready (" << fmt("%.0fs", seconds_since(t0)) << ")\n";

  train::TrainConfig cfg;
  cfg.image_size = 64;
  cfg.epochs = 5;
  cfg.seed = 7;
  cfg.train_fraction = 0.958;
  const auto t1 = Clock::now();
  const auto result = train::train_corpus(root / "augmented", cfg, root / "run", [&](const train::LossRecord& r) {
    if (r.step % 500 == 0)
      std::cerr << "  step " << r.step << " l1=" << r.loss_l1 << " (" << fmt("%.0fs", seconds_since(t1)) << ")\n";
  });
  const double train_time = seconds_since(t1);
  const std::size_t n_train = result.split.train.size(), n_test = result.split.test.size();
  std::set<std::string> train_bases;
  for (const auto& id : result.split.train) train_bases.insert(aug.find(id).base_id);
  bool disjoint = true;
  for (const auto& id : result.split.test) disjoint = disjoint && !train_bases.count(aug.find(id).base_id);
  rep.check("split base-id safe", disjoint, "no base id on both sides");
  rep.check("split=(1437,63)", n_train == 1437 && n_test == 63,
            "got (" + std::to_string(n_train) + "," + std::to_string(n_test) +
                "); whole groups of 15 cannot sum to 1437");

  const auto log = train::LossLog::load(root / "run" / "losses.csv");
  bool finite = !log.records.empty();
  for (const auto& r : log.records) finite = finite && r.finite();
  rep.check("loss csv finite", finite, std::to_string(log.records.size()) + " rows");
  rep.check("train<=30min", train_time <= 1800.0, fmt("%.0fs", train_time));

  train::PairSource test(root / "augmented", result.split.test, cfg.image_size);
  const auto generator = nn::load_generator(root / "run" / "checkpoint");
  const auto report = fid::evaluate_model(generator, test, fid::RandomConvEmbedder{}, result.checkpoint.id, cfg.seed);
  write_text(root / "run" / "fid.json", report.to_json().dump(1) + "\n");
  rep.check("fid report finite", std::isfinite(report.fid) && std::isfinite(report.mean_l1),
            "fid " + fmt("%.4g", report.fid) + ", mean L1 " + fmt("%.4f", report.mean_l1) + " on " +
                std::to_string(report.n_test) + " pairs");
  return rep;
}

// --- FID closed forms -------------------------------------------------------------

Report fid_closed_forms() {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  Report rep;
  Rng rng(1);
  auto spd = [&](int d) {
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
    return MatrixXd(a * a.transpose() / d + 0.1 * MatrixXd::Identity(d, d));
  };
  auto vec = [&](int d) {
    VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    return v;
  };
  double self = 0.0;
  for (int d : {1, 4, 32, 128}) {
    const auto s = fid::EmbeddingSet::from_moments(vec(d), spd(d));
    self = std::max(self, std::abs(fid::frechet_distance(s, s)));
  }
  rep.check("self<=1e-9", self <= 1e-9, fmt("%.3g", self));

  const auto a1 = fid::EmbeddingSet::from_moments(VectorXd::Constant(1, 0.0), MatrixXd::Constant(1, 1, 2.0));
  const auto b1 = fid::EmbeddingSet::from_moments(VectorXd::Constant(1, 1.0), MatrixXd::Constant(1, 1, 2.0));
  const double one = fid::frechet_distance(a1, b1);
  rep.check("1-D=1", std::abs(one - 1.0) <= 1e-9, fmt("%.12f", one));

  VectorXd m1(2), m2(2);
  m1 << 0, 0;
  m2 << 1, 0;
  MatrixXd s2 = MatrixXd::Identity(2, 2);
  s2(1, 1) = 4;
  const double two = fid::frechet_distance(fid::EmbeddingSet::from_moments(m1, MatrixXd::Identity(2, 2)),
                                           fid::EmbeddingSet::from_moments(m2, s2));
  rep.check("2-D diagonal=2", std::abs(two - 2.0) <= 1e-9, fmt("%.12f", two));

  double asym = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(30));
    const auto a = fid::EmbeddingSet::from_moments(vec(d), spd(d));
    const auto b = fid::EmbeddingSet::from_moments(vec(d), spd(d));
    asym = std::max(asym, std::abs(fid::frechet_distance(a, b) - fid::frechet_distance(b, a)));
  }
  rep.check("symmetry<=1e-8", asym <= 1e-8, fmt("%.3g", asym));

  const int d = 4, n = 100000;
  const MatrixXd c1 = spd(d), c2 = spd(d);
  const VectorXd mu1 = vec(d), mu2 = vec(d);
  const Eigen::LLT<MatrixXd> l1(c1), l2(c2);
  MatrixXd x1(n, d), x2(n, d);
  for (int i = 0; i < n; ++i) {
    VectorXd z1(d), z2(d);
    for (int j = 0; j < d; ++j) {
      z1[j] = rng.normal();
      z2[j] = rng.normal();
    }
    x1.row(i) = (mu1 + l1.matrixL() * z1).transpose();
    x2.row(i) = (mu2 + l2.matrixL() * z2).transpose();
  }
  const double exact =
      fid::frechet_distance(fid::EmbeddingSet::from_moments(mu1, c1), fid::EmbeddingSet::from_moments(mu2, c2));
  const double mc = fid::frechet_distance(fid::EmbeddingSet::from_samples(x1), fid::EmbeddingSet::from_samples(x2));
  const double rel = std::abs(mc / exact - 1.0);
  rep.check("monte carlo within 2%", rel <= 0.02,
            fmt("%.5g", mc) + " vs " + fmt("%.5g", exact) + " (" + fmt("%.2f%%", 100 * rel) + ")");
  return rep;
}

// --- shape fit ------------------------------------------------------------------------

Report shape_fit() {
  Report rep;
  const auto t0 = Clock::now();
  fit::HoughConfig cfg;

  double worst_circle = 0.0;
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    shape::ShapeLayout l;
    const double r = rng.uniform(12, 90);
    l.shapes.push_back(shape::ShapePrimitive::circle(rng.uniform(r + 8, 256 - r - 8), rng.uniform(r + 8, 256 - r - 8), r));
    const auto dets = fit::detect_circles(shape::rasterize(l, 256, 256, 1), cfg);
    if (dets.empty()) {
      worst_circle = 1e9;
      continue;
    }
    const auto& s = l.shapes[0];
    worst_circle = std::max({worst_circle, std::hypot(dets[0].cx - s.cx, dets[0].cy - s.cy), std::abs(dets[0].r - s.rx)});
  }
  rep.check("circle within 2px", worst_circle <= 2.0, "worst " + fmt("%.2f", worst_circle) + " px over 30 circles");

  double total = 0.0;
  int count = 0, within = 0;
  for (int i = 0; i < 50; ++i) {
    const auto layout = toon::sample_layout(derive_seed(99, i));
    const RasterImage img = toon::render_toon(layout, toon::ToonStyle::mouse(), 256, 256);
    shape::ShapeLayout fitted;
    try {
      fitted = fit::fit_layout(img, cfg);
    } catch (const ValidationError&) {
    }
    for (const auto& s : layout.shapes) {
      double best = 256.0;  // a missed primitive costs the canvas size
      for (const auto& f : fitted.shapes) best = std::min(best, std::hypot(f.cx - s.cx, f.cy - s.cy));
      total += best;
      within += best <= 4.0;
      ++count;
    }
  }
  const double mean = total / count;
  rep.check("toon mean center error<=4px", mean <= 4.0,
            fmt("%.2f", mean) + " px over " + std::to_string(count) + " primitives, " + std::to_string(within) +
                " within 4 px");

  shape::ShapeLayout tiny;
  tiny.canvas_w = 24;
  tiny.canvas_h = 20;
  tiny.shapes.push_back(shape::ShapePrimitive::circle(12, 10, 6, 1.5));
  tiny.shapes.push_back(shape::ShapePrimitive::oval(10, 9, 5, 3, 40, 1.0));
  fit::HoughConfig small = cfg;
  small.r_min = 2;
  small.r_max = 10;
  const fit::EdgeMap edges = fit::extract_edges(shape::rasterize(tiny, 24, 20, 1), small.edge_threshold);
  int nr = 0;
  const auto brute = testing::brute_force_accumulator(edges, small, &nr);
  const auto acc = fit::circle_accumulator(edges, small);
  rep.check("brute-force accumulator", acc.votes == brute && acc.nr == nr,
            std::to_string(edges.points.size()) + " edges, " + std::to_string(brute.size()) + " cells");
  const double elapsed = seconds_since(t0);
  rep.check("runtime<5min", elapsed < 300.0, fmt("%.0fs", elapsed));
  return rep;
}

// --- determinism & persistence ----------------------------------------------------------

Report determinism() {
  Report rep;
  const fs::path root = work_dir("determinism");
  const auto a = toon::build_corpus(5, 11, root / "a");
  const auto b = toon::build_corpus(5, 11, root / "b");
  bool same = read_text(root / "a" / "manifest.json") == read_text(root / "b" / "manifest.json");
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && read_file(corpus::pair_path(root / "a", a.entries[i].id)) ==
                       read_file(corpus::pair_path(root / "b", b.entries[i].id));
    same = same && read_text(corpus::layout_path(root / "a", a.entries[i].id)) ==
                       read_text(corpus::layout_path(root / "b", b.entries[i].id));
  }
  rep.check("corpus byte-identical", same, std::to_string(a.size()) + " pairs");

  train::TrainConfig cfg;
  cfg.image_size = 32;
  cfg.ng = 8;
  cfg.nd = 8;
  cfg.epochs = 2;
  cfg.seed = 5;
  auto run = [&] {
    train::PairSource data(root / "a", {a.entries[0].id, a.entries[1].id, a.entries[2].id}, 32);
    train::Trainer t(cfg);
    t.run(data);
    return std::make_pair(t.log(), t.model());
  };
  const auto [log1, model1] = run();
  const auto [log2, model2] = run();
  rep.check("training logs identical", log1 == log2 && log1.to_csv() == log2.to_csv(),
            std::to_string(log1.records.size()) + " steps");

  nn::CheckpointInfo info;
  info.seed = cfg.seed;
  const auto saved = nn::save_checkpoint(root / "ckpt", model1, info);
  const auto loaded = nn::load_checkpoint(root / "ckpt");
  const RasterImage src = corpus::load_pair(root / "a", a.entries[3].id).source;
  bool identical = true;
  for (std::uint64_t seed : {0ull, 1ull, 99ull})
    identical = identical && train::translate(model1.generator, src, seed) == train::translate(loaded.generator, src, seed);
  rep.check("checkpoint translation bit-identical", identical, "checkpoint " + saved.id);
  return rep;
}

// --- augmentation laws -----------------------------------------------------------------

Report augmentation_laws() {
  Report rep;
  const fs::path root = work_dir("augment");
  const auto base = toon::build_corpus(6, 3, root / "base");
  augment::AugmentationPlan plan;
  plan.rng_seed = 4;
  const auto aug = augment::expand_corpus(root / "base", base, plan, root / "aug");
  rep.check("count=base*15", aug.size() == base.size() * 15, std::to_string(aug.size()));

  bool identity = true;
  for (std::size_t b = 0; b < base.size(); ++b)
    identity = identity && read_file(corpus::pair_path(root / "aug", aug.entries[b * 15].id)) ==
                               read_file(corpus::pair_path(root / "base", base.entries[b].id));
  rep.check("identity variant byte-exact", identity, std::to_string(base.size()) + " bases");

  shape::AffineTransform flip;
  flip.flip_h = true;
  double worst = 0.0;
  for (const auto& e : base.entries) {
    const auto pair = corpus::load_pair(root / "base", e.id);
    for (const RasterImage* img : {&pair.source, &pair.target}) {
      const RasterImage back = augment::warp_image(augment::warp_image(*img, flip), flip);
      for (std::size_t i = 0; i < back.pixels().size(); ++i)
        worst = std::max(worst, static_cast<double>(std::abs(back.pixels()[i] - img->pixels()[i])));
    }
  }
  rep.check("flip involution<=2/255", worst <= 2.0 / 255.0, "max diff " + fmt("%.3g", worst));

  bool disjoint = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto split = train::split_corpus(aug, 0.7, seed);
    std::set<std::string> train_bases;
    for (const auto& id : split.train) train_bases.insert(aug.find(id).base_id);
    for (const auto& id : split.test) disjoint = disjoint && !train_bases.count(aug.find(id).base_id);
  }
  rep.check("split base-id disjoint", disjoint, "10 seeds");
  return rep;
}

const std::vector<std::pair<std::string, std::function<Report()>>> kCriteria = {
    {"gradient_correctness", gradient_correctness},
    {"loss_oracles", loss_oracles},
    {"architecture_contracts", architecture_contracts},
    {"overfit_capacity", overfit_capacity},
    {"end_to_end", end_to_end},
    {"fid_closed_forms", fid_closed_forms},
    {"shape_fit", shape_fit},
    {"determinism", determinism},
    {"augmentation_laws", augmentation_laws},
};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  bool keep = false;
  g_work = fs::temp_directory_path() / "s2t-acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = argv[++i];
    } else if (arg == "--work" && i + 1 < argc) {
      g_work = argv[++i];
    } else if (arg == "--keep") {
      keep = true;
    } else {
      std::cerr << "usage: acceptance [--criterion NAME] [--work DIR] [--keep]\n";
      return 2;
    }
  }
  if (!only.empty()) g_work /= only;

  int failed = 0, ran = 0;
  for (const auto& [name, fn] : kCriteria) {
    if (!only.empty() && name != only) continue;
    ++ran;
    const auto t0 = Clock::now();
    std::cerr << "[" << name << "]\n";
    bool ok = false;
    std::string detail;
    try {
      const Report rep = fn();
      ok = rep.passed();
      detail = rep.summary();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "PASS " : "FAIL ") << name << " [" << fmt("%.1fs", seconds_since(t0)) << "] " << detail
              << std::endl;
    failed += !ok;
  }
  if (ran == 0) {
    std::cerr << "unknown criterion: " << only << "\n";
    return 2;
  }
  if (!keep) {
    std::error_code ec;
    fs::remove_all(g_work, ec);
  }
  return failed == 0 ? 0 : 1;
}
