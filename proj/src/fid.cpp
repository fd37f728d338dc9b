#include "shapes2toon/fid.hpp"

#include <cmath>

#include "shapes2toon/nn/ops.hpp"

namespace s2t::fid {

using nlohmann::json;

namespace {

// Pairwise sum of rows [lo, hi), so the result does not depend on how a
// caller chunked the work.
Eigen::VectorXd pairwise_sum(const Eigen::MatrixXd& rows, Eigen::Index lo, Eigen::Index hi) {
  if (hi - lo <= 8) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(rows.cols());
    for (Eigen::Index i = lo; i < hi; ++i) s += rows.row(i).transpose();
    return s;
  }
  const Eigen::Index mid = lo + (hi - lo) / 2;
  return pairwise_sum(rows, lo, mid) + pairwise_sum(rows, mid, hi);
}

Eigen::MatrixXd pairwise_outer(const Eigen::MatrixXd& centered, Eigen::Index lo, Eigen::Index hi) {
  if (hi - lo <= 64) {
    const auto block = centered.middleRows(lo, hi - lo);
    return block.transpose() * block;
  }
  const Eigen::Index mid = lo + (hi - lo) / 2;
  return pairwise_outer(centered, lo, mid) + pairwise_outer(centered, mid, hi);
}

struct SymEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

SymEig sym_eig(const Eigen::MatrixXd& m, FrechetDiagnostics& diag) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  SymEig out{es.eigenvalues(), es.eigenvectors()};
  const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    double& v = out.values[i];
    diag.min_eigenvalue = std::min(diag.min_eigenvalue, v);
    if (v < -1e-6 * scale) throw NumericError("covariance not PSD: eigenvalue " + std::to_string(v));
    if (v < 0.0) {
      v = 0.0;
      ++diag.clamped_eigenvalues;
    }
  }
  return out;
}

}  // namespace

EmbeddingSet EmbeddingSet::from_samples(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw ValidationError("need at least 2 samples to fit a covariance");
  EmbeddingSet s;
  s.n = static_cast<std::size_t>(rows.rows());
  s.mu = pairwise_sum(rows, 0, rows.rows()) / static_cast<double>(rows.rows());
  const Eigen::MatrixXd centered = rows.rowwise() - s.mu.transpose();
  s.sigma = pairwise_outer(centered, 0, rows.rows()) / static_cast<double>(rows.rows() - 1);
  s.sigma = 0.5 * (s.sigma + s.sigma.transpose());
  return s;
}

EmbeddingSet EmbeddingSet::from_moments(Eigen::VectorXd mu, Eigen::MatrixXd sigma, std::size_t n) {
  if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
    throw ValidationError("covariance shape does not match mean");
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw ValidationError("covariance must be symmetric");
  EmbeddingSet s;
  s.n = n;
  s.mu = std::move(mu);
  s.sigma = std::move(sigma);
  return s;
}

double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b, FrechetDiagnostics* diag) {
  if (a.dim() != b.dim())
    throw ValidationError("embedding dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  FrechetDiagnostics local;
  FrechetDiagnostics& d = diag ? *diag : local;
  d = {};
  const SymEig e1 = sym_eig(a.sigma, d);
  sym_eig(b.sigma, d);
  const Eigen::MatrixXd s1h = e1.vectors * e1.values.cwiseSqrt().asDiagonal() * e1.vectors.transpose();
  const SymEig em = sym_eig(s1h * b.sigma * s1h, d);
  const double tr_sqrt = em.values.cwiseSqrt().sum();
  const double dist = (a.mu - b.mu).squaredNorm() + a.sigma.trace() + b.sigma.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, dist);
}

// --- extractors -------------------------------------------------------------------

RandomConvEmbedder::RandomConvEmbedder(std::uint64_t seed, int input_size) : seed_(seed), input_size_(input_size) {
  if (input_size < 16) throw ValidationError("embedder input size must be >= 16");
  channels_ = {3, 16, 32, 64};
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < channels_.size(); ++i) {
    const int in = channels_[i];
    const int out = channels_[i + 1];
    nn::Parameter<float> w{"embed.conv" + std::to_string(i), nn::Tensor<float>({out, in, 4, 4}), {}};
    const double sd = std::sqrt(2.0 / (in * 16));
    for (auto& v : w.value.values()) v = static_cast<float>(rng.normal(0.0, sd));
    weights_.push_back(std::move(w));
  }
}

std::string RandomConvEmbedder::id() const {
  return "random-conv-" + std::to_string(input_size_) + "-" + std::to_string(seed_);
}

int RandomConvEmbedder::dim() const { return 2 * channels_.back(); }

Eigen::VectorXd RandomConvEmbedder::extract(const RasterImage& img) const {
  const RasterImage in = train::fit_image(img, input_size_);
  nn::Tape<float> tape(false);
  auto h = nn::affine(tape.constant(nn::image_to_tensor<float>(in)), 2.f, -1.f);
  for (const auto& w : weights_) {
    h = nn::conv2d(h, tape.frozen(w), std::optional<nn::Var<float>>{}, nn::ConvGeometry{4, 2, 1});
    h = nn::leaky_relu(h, 0.2f);
  }
  const auto& t = h.value();
  const int c = t.dim(1);
  const int hw = t.dim(2) * t.dim(3);
  Eigen::VectorXd f(2 * c);
  for (int k = 0; k < c; ++k) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < hw; ++i) {
      const double v = t[static_cast<std::size_t>(k) * hw + i];
      s += v;
      s2 += v * v;
    }
    const double mean = s / hw;
    f[k] = mean;
    f[c + k] = std::sqrt(std::max(0.0, s2 / hw - mean * mean));
  }
  return f;
}

Eigen::VectorXd PixelEmbedder::extract(const RasterImage& img) const {
  const RasterImage small = train::fit_image(img, size_);
  Eigen::VectorXd f(dim());
  for (std::size_t i = 0; i < small.pixels().size(); ++i) f[static_cast<Eigen::Index>(i)] = small.pixels()[i];
  return f;
}

EmbeddingSet embed(const std::vector<RasterImage>& images, const FeatureExtractor& extractor) {
  if (images.size() < 2) throw ValidationError("embed needs at least 2 images");
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(images.size()), extractor.dim());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Eigen::VectorXd f = extractor.extract(images[i]);
    if (f.size() != extractor.dim())
      throw ValidationError("extractor output dimension mismatch at image " + std::to_string(i));
    if (!f.allFinite()) throw NumericError("non-finite features at image " + std::to_string(i));
    rows.row(static_cast<Eigen::Index>(i)) = f.transpose();
  }
  return EmbeddingSet::from_samples(rows);
}

// --- evaluation ---------------------------------------------------------------------

json FidReport::to_json() const {
  return {{"fid", fid},
          {"mean_l1", mean_l1},
          {"n_test", n_test},
          {"extractor_id", extractor_id},
          {"checkpoint_id", checkpoint_id}};
}

FidReport evaluate_images(const std::vector<RasterImage>& generated, const std::vector<RasterImage>& real,
                          const FeatureExtractor& extractor) {
  if (generated.empty() || generated.size() != real.size())
    throw ValidationError("evaluation needs equally many generated and real images");
  FidReport r;
  r.n_test = real.size();
  r.extractor_id = extractor.id();
  double l1 = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) l1 += mean_abs_diff(generated[i], real[i]);
  r.mean_l1 = l1 / static_cast<double>(real.size());
  r.fid = frechet_distance(embed(generated, extractor), embed(real, extractor));
  return r;
}

FidReport evaluate_model(const nn::UNetGenerator<float>& generator, train::PairSource& pairs,
                         const FeatureExtractor& extractor, const std::string& checkpoint_id,
                         std::uint64_t dropout_seed) {
  if (pairs.size() == 0) throw ValidationError("test split is empty");
  std::vector<RasterImage> generated, real;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs.get(i);
    generated.push_back(train::translate(generator, p.source, derive_seed(dropout_seed, i)));
    real.push_back(p.target);
  }
  FidReport r = evaluate_images(generated, real, extractor);
  r.checkpoint_id = checkpoint_id;
  return r;
}

}  // namespace s2t::fid
