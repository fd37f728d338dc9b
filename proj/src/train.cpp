#include "shapes2toon/train.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace s2t::train {

namespace fs = std::filesystem;
using nlohmann::json;

// --- config -------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ValidationError("lr must be > 0", "train.lr");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1", "train.batch_size");
  if (epochs < 1) throw ValidationError("epochs must be >= 1", "train.epochs");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("beta1 must lie in [0,1)", "train.beta1");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("beta2 must lie in [0,1)", "train.beta2");
  if (!(lambda_l1 >= 0.0)) throw ValidationError("lambda_l1 must be >= 0", "train.lambda_l1");
  if (checkpoint_every < 0) throw ValidationError("checkpoint_every must be >= 0", "train.checkpoint_every");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must lie in (0,1)", "train.train_fraction");
  generator_config().validate();
  discriminator_config().validate();
}

nn::GeneratorConfig TrainConfig::generator_config() const {
  nn::GeneratorConfig g;
  g.ng = ng;
  g.image_size = image_size;
  return g;
}

nn::DiscriminatorConfig TrainConfig::discriminator_config() const {
  nn::DiscriminatorConfig d;
  d.nd = nd;
  return d;
}

json TrainConfig::to_json() const {
  return {{"lr", lr},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"beta1", beta1},
          {"beta2", beta2},
          {"lambda_l1", lambda_l1},
          {"seed", seed},
          {"image_size", image_size},
          {"checkpoint_every", checkpoint_every},
          {"ng", ng},
          {"nd", nd},
          {"train_fraction", train_fraction}};
}

// --- loss log -----------------------------------------------------------------

bool LossRecord::finite() const {
  return std::isfinite(loss_g_adv) && std::isfinite(loss_d) && std::isfinite(loss_l1);
}

std::string LossLog::to_csv() const {
  std::string out = "step,loss_g_adv,loss_d,loss_l1\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g\n", r.step, r.loss_g_adv, r.loss_d, r.loss_l1);
    out += buf;
  }
  return out;
}

LossLog LossLog::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,loss_g_adv,loss_d,loss_l1", 0) != 0)
    throw ParseError("loss log: missing header step,loss_g_adv,loss_d,loss_l1");
  LossLog log;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    LossRecord r;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf", &r.step, &r.loss_g_adv, &r.loss_d, &r.loss_l1) != 4)
      throw ParseError("loss log: malformed row", "line " + std::to_string(lineno));
    log.records.push_back(r);
  }
  return log;
}

void LossLog::save(const fs::path& path) const { write_text(path, to_csv()); }

LossLog LossLog::load(const fs::path& path) { return from_csv(read_text(path)); }

// --- split ----------------------------------------------------------------------

json Split::to_json() const {
  json j = {{"train", train}, {"test", test}};
  if (!warning.empty()) j["warning"] = warning;
  return j;
}

Split split_corpus(const corpus::CorpusManifest& manifest, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train fraction must lie in (0,1)", "train_fraction");
  if (manifest.entries.empty()) throw ValidationError("cannot split an empty corpus");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& e : manifest.entries) {
    const std::string& key = e.base_id.empty() ? e.id : e.base_id;
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(e.id);
  }
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const long n = static_cast<long>(manifest.size());
  const long target = std::lround(static_cast<double>(n) * train_fraction);
  Split split;
  long total = 0;
  for (const auto& key : order) {
    const auto& members = groups[key];
    const long size = static_cast<long>(members.size());
    const bool take = std::abs(total + size - target) <= std::abs(total - target) && total < target;
    auto& side = take ? split.train : split.test;
    side.insert(side.end(), members.begin(), members.end());
    if (take) total += size;
  }
  if (split.test.empty()) split.warning = "test split is empty";
  if (split.train.empty()) split.warning = "train split is empty";
  return split;
}

// --- data -----------------------------------------------------------------------

RasterImage fit_image(const RasterImage& img, int image_size) {
  RasterImage rgb = img.channels() == 3 ? img : to_rgb(img);
  if (rgb.width() == image_size && rgb.height() == image_size) return rgb;
  if (rgb.width() != rgb.height()) {
    // Letterbox onto a white square before scaling.
    const int side = std::max(rgb.width(), rgb.height());
    RasterImage square(side, side, 3, 1.f);
    const int ox = (side - rgb.width()) / 2;
    const int oy = (side - rgb.height()) / 2;
    for (int y = 0; y < rgb.height(); ++y)
      for (int x = 0; x < rgb.width(); ++x)
        for (int c = 0; c < 3; ++c) square.at(x + ox, y + oy, c) = rgb.at(x, y, c);
    rgb = std::move(square);
  }
  return resize_bilinear(rgb, image_size, image_size);
}

corpus::PairedSample fit_to_size(corpus::PairedSample pair, int image_size) {
  pair.source = fit_image(pair.source, image_size);
  pair.target = fit_image(pair.target, image_size);
  return pair;
}

PairSource::PairSource(fs::path dir, std::vector<std::string> ids, int image_size, bool cache)
    : dir_(std::move(dir)), ids_(std::move(ids)), image_size_(image_size), cache_(cache), cached_(ids_.size()) {}

PairSource::PairSource(std::vector<corpus::PairedSample> pairs, int image_size)
    : image_size_(image_size), cache_(true), cached_(pairs.size()) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ids_.push_back(pairs[i].id);
    cached_[i] = fit_to_size(std::move(pairs[i]), image_size);
  }
}

corpus::PairedSample PairSource::load(std::size_t i) const {
  return fit_to_size(corpus::load_pair(dir_, ids_.at(i)), image_size_);
}

const corpus::PairedSample& PairSource::get(std::size_t i) {
  if (cached_.at(i)) return *cached_[i];
  if (cache_) {
    cached_[i] = load(i);
    return *cached_[i];
  }
  scratch_ = load(i);
  return scratch_;
}

// --- trainer --------------------------------------------------------------------

Trainer::Trainer(const TrainConfig& cfg)
    : Trainer(cfg, nn::Pix2Pix<float>(cfg.generator_config(), cfg.discriminator_config(), cfg.seed)) {}

Trainer::Trainer(const TrainConfig& cfg, nn::Pix2Pix<float> model)
    : cfg_(cfg),
      model_(std::move(model)),
      opt_g_(model_.generator.params(), {cfg.lr, cfg.beta1, cfg.beta2}),
      opt_d_(model_.discriminator.params(), {cfg.lr, cfg.beta1, cfg.beta2}) {
  cfg_.validate();
}

LossRecord Trainer::step(const std::vector<const corpus::PairedSample*>& batch) {
  if (batch.empty()) throw ValidationError("empty training batch");
  std::vector<RasterImage> src, tgt;
  for (const auto* p : batch) {
    src.push_back(p->source);
    tgt.push_back(p->target);
  }
  nn::Tape<float> tape(false);
  const auto s = tape.constant(nn::images_to_batch<float>(src));
  const auto t = tape.constant(nn::images_to_batch<float>(tgt));
  Rng dropout_rng(derive_seed(cfg_.seed, 0xd0d0, static_cast<std::uint64_t>(step_)));

  const auto fake = model_.generator.forward(tape, s, &dropout_rng);

  const auto d_real = model_.discriminator.forward(tape, s, t);
  const auto d_fake = model_.discriminator.forward(tape, s, nn::detach(fake));
  const auto loss_d = nn::discriminator_loss(d_real, d_fake);
  LossRecord rec;
  rec.step = step_ + 1;
  rec.loss_d = loss_d.value().item();
  if (!std::isfinite(rec.loss_d))
    throw NumericError("non-finite discriminator loss at step " + std::to_string(rec.step));
  tape.backward(loss_d);

  // The generator sees the updated discriminator.
  opt_d_.step();
  const auto d_fake_g = model_.discriminator.forward(tape, s, fake);
  const auto adv = nn::generator_adv_loss(d_fake_g);
  const auto l1 = nn::l1_loss(fake, t);
  const auto loss_g = nn::add(adv, nn::affine(l1, static_cast<float>(cfg_.lambda_l1), 0.f));
  rec.loss_g_adv = adv.value().item();
  rec.loss_l1 = l1.value().item();
  if (!rec.finite()) throw NumericError("non-finite generator loss at step " + std::to_string(rec.step));
  tape.backward(loss_g);
  opt_g_.step();

  ++step_;
  log_.records.push_back(rec);
  return rec;
}

void Trainer::run(PairSource& data, const std::function<void(const LossRecord&)>& on_step) {
  if (data.size() == 0) throw ValidationError("training set is empty");
  std::vector<std::size_t> order(data.size());
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(cfg_.seed, 0xe90c, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(cfg_.batch_size)) {
      std::vector<corpus::PairedSample> held;
      const std::size_t end = std::min(order.size(), i + static_cast<std::size_t>(cfg_.batch_size));
      for (std::size_t k = i; k < end; ++k) held.push_back(data.get(order[k]));
      std::vector<const corpus::PairedSample*> batch;
      for (const auto& p : held) batch.push_back(&p);
      const LossRecord rec = step(batch);
      if (on_step) on_step(rec);
    }
  }
}

TrainResult train_corpus(const fs::path& corpus_dir, const TrainConfig& cfg, const fs::path& out_dir,
                         const std::function<void(const LossRecord&)>& on_step) {
  cfg.validate();
  const auto manifest = corpus::CorpusManifest::load(corpus_dir);
  TrainResult result;
  result.split = split_corpus(manifest, cfg.train_fraction, cfg.seed);
  if (result.split.train.empty()) throw ValidationError("train split is empty");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "split.json", result.split.to_json().dump(1) + "\n");
  write_text(out_dir / "train_config.json", cfg.to_json().dump(1) + "\n");

  // Decoded pairs are kept in memory when they fit comfortably.
  const double bytes_per_pair = 2.0 * 3 * 4 * cfg.image_size * cfg.image_size;
  const bool cache = bytes_per_pair * static_cast<double>(result.split.train.size()) < 1.5e9;
  PairSource data(corpus_dir, result.split.train, cfg.image_size, cache);
  Trainer trainer(cfg);

  const fs::path ckpt_dir = out_dir / "checkpoint";
  auto save = [&]() {
    nn::CheckpointInfo info;
    info.step = trainer.steps();
    info.seed = cfg.seed;
    return nn::save_checkpoint(ckpt_dir, trainer.model(), info);
  };
  try {
    trainer.run(data, [&](const LossRecord& r) {
      if (on_step) on_step(r);
      if (cfg.checkpoint_every > 0 && r.step % cfg.checkpoint_every == 0) save();
    });
  } catch (const NumericError&) {
    trainer.log().save(out_dir / "losses.csv");
    // The generator has not been updated by the failing step.
    save();
    throw;
  }
  trainer.log().save(out_dir / "losses.csv");
  result.checkpoint = save();
  result.log = trainer.log();
  return result;
}

RasterImage translate(const nn::UNetGenerator<float>& generator, const RasterImage& source,
                      std::uint64_t dropout_seed) {
  const RasterImage in = fit_image(source, generator.config().image_size);
  nn::Tape<float> tape(false);
  const auto x = tape.constant(nn::image_to_tensor<float>(in));
  Rng rng(dropout_seed);
  const auto y = generator.infer(tape, x, &rng);
  RasterImage out = nn::tensor_to_image(y.value());
  out.clamp();
  return out;
}

}  // namespace s2t::train
