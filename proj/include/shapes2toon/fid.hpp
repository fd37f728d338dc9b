#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapes2toon/image.hpp"
#include "shapes2toon/nn/models.hpp"
#include "shapes2toon/train.hpp"

namespace s2t::fid {

struct EmbeddingSet {
  std::size_t n = 0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;

  int dim() const { return static_cast<int>(mu.size()); }

  // Rows are samples. Sample mean and unbiased covariance, accumulated with
  // pairwise summation.
  static EmbeddingSet from_samples(const Eigen::MatrixXd& rows);
  static EmbeddingSet from_moments(Eigen::VectorXd mu, Eigen::MatrixXd sigma, std::size_t n = 0);
};

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string id() const = 0;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd extract(const RasterImage& img) const = 0;
};

// Fixed-seed random convolutional features (three stride-2 convs, leaky ReLU,
// then per-channel mean and standard deviation). Scores are only comparable
// between runs that use the same extractor id.
class RandomConvEmbedder : public FeatureExtractor {
 public:
  explicit RandomConvEmbedder(std::uint64_t seed = 20240229, int input_size = 64);

  std::string id() const override;
  int dim() const override;
  Eigen::VectorXd extract(const RasterImage& img) const override;

 private:
  std::uint64_t seed_;
  int input_size_;
  std::vector<nn::Parameter<float>> weights_;
  std::vector<int> channels_;
};

// Raw pixels of a small thumbnail; handy for tests.
class PixelEmbedder : public FeatureExtractor {
 public:
  explicit PixelEmbedder(int size = 4) : size_(size) {}
  std::string id() const override { return "pixels-" + std::to_string(size_); }
  int dim() const override { return size_ * size_ * 3; }
  Eigen::VectorXd extract(const RasterImage& img) const override;

 private:
  int size_;
};

EmbeddingSet embed(const std::vector<RasterImage>& images, const FeatureExtractor& extractor);

struct FrechetDiagnostics {
  int clamped_eigenvalues = 0;
  double min_eigenvalue = 0.0;
};

// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2).
double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b, FrechetDiagnostics* diag = nullptr);

struct FidReport {
  double fid = 0.0;
  double mean_l1 = 0.0;
  std::size_t n_test = 0;
  std::string extractor_id;
  std::string checkpoint_id;

  nlohmann::json to_json() const;
};

// Translates every source, then compares generated and real targets.
FidReport evaluate_model(const nn::UNetGenerator<float>& generator, train::PairSource& pairs,
                         const FeatureExtractor& extractor, const std::string& checkpoint_id = {},
                         std::uint64_t dropout_seed = 0);

// Same with images given directly.
FidReport evaluate_images(const std::vector<RasterImage>& generated, const std::vector<RasterImage>& real,
                          const FeatureExtractor& extractor);

}  // namespace s2t::fid
