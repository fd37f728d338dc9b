#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapes2toon/corpus.hpp"
#include "shapes2toon/nn/checkpoint.hpp"
#include "shapes2toon/nn/losses.hpp"
#include "shapes2toon/nn/optim.hpp"

namespace s2t::train {

struct TrainConfig {
  double lr = 2e-4;
  int batch_size = 1;
  int epochs = 30;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double lambda_l1 = 100.0;
  std::uint64_t seed = 0;
  int image_size = 64;
  long checkpoint_every = 0;  // steps; 0 checkpoints only at the end
  int ng = 64;
  int nd = 64;
  double train_fraction = 0.958;

  void validate() const;
  nn::GeneratorConfig generator_config() const;
  nn::DiscriminatorConfig discriminator_config() const;
  nlohmann::json to_json() const;
};

struct LossRecord {
  long step = 0;
  double loss_g_adv = 0.0;
  double loss_d = 0.0;
  double loss_l1 = 0.0;

  bool finite() const;
  bool operator==(const LossRecord&) const = default;
};

struct LossLog {
  std::vector<LossRecord> records;

  // step,loss_g_adv,loss_d,loss_l1 with round-trip precision.
  std::string to_csv() const;
  static LossLog from_csv(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static LossLog load(const std::filesystem::path& path);
  bool operator==(const LossLog&) const = default;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::string warning;

  nlohmann::json to_json() const;
};

// Whole base-id groups go to one side. The train side takes the number of
// samples closest to round(n * fraction) reachable with whole groups.
Split split_corpus(const corpus::CorpusManifest& manifest, double train_fraction, std::uint64_t seed);

// Source/target tensors at model resolution, decoded lazily or cached.
class PairSource {
 public:
  PairSource(std::filesystem::path dir, std::vector<std::string> ids, int image_size, bool cache = true);
  PairSource(std::vector<corpus::PairedSample> pairs, int image_size);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const corpus::PairedSample& get(std::size_t i);

 private:
  corpus::PairedSample load(std::size_t i) const;

  std::filesystem::path dir_;
  std::vector<std::string> ids_;
  int image_size_;
  bool cache_;
  std::vector<std::optional<corpus::PairedSample>> cached_;
  corpus::PairedSample scratch_;
};

// Fits a pair to the model resolution (RGB, square).
corpus::PairedSample fit_to_size(corpus::PairedSample pair, int image_size);
RasterImage fit_image(const RasterImage& img, int image_size);

class Trainer {
 public:
  Trainer(const TrainConfig& cfg);
  Trainer(const TrainConfig& cfg, nn::Pix2Pix<float> model);

  // One D update then one G update on a batch; throws NumericError before
  // touching the parameters when a loss is not finite.
  LossRecord step(const std::vector<const corpus::PairedSample*>& batch);

  // Runs full epochs over `data` in seed-determined order.
  void run(PairSource& data, const std::function<void(const LossRecord&)>& on_step = {});

  nn::Pix2Pix<float>& model() { return model_; }
  const nn::Pix2Pix<float>& model() const { return model_; }
  long steps() const { return step_; }
  const LossLog& log() const { return log_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  TrainConfig cfg_;
  nn::Pix2Pix<float> model_;
  nn::Adam<float> opt_g_;
  nn::Adam<float> opt_d_;
  long step_ = 0;
  LossLog log_;
};

struct TrainResult {
  nn::CheckpointInfo checkpoint;
  LossLog log;
  Split split;
};

// Full pipeline over a corpus directory: split, train, write
// {out}/checkpoint, {out}/losses.csv, {out}/split.json.
// On a non-finite loss the last good parameters are saved and NumericError
// is rethrown.
TrainResult train_corpus(const std::filesystem::path& corpus_dir, const TrainConfig& cfg,
                         const std::filesystem::path& out_dir,
                         const std::function<void(const LossRecord&)>& on_step = {});

// G(source) at model resolution, with dropout drawn from `dropout_seed`.
RasterImage translate(const nn::UNetGenerator<float>& generator, const RasterImage& source,
                      std::uint64_t dropout_seed = 0);

}  // namespace s2t::train
