#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "shapes2toon/augment.hpp"
#include "shapes2toon/cli.hpp"
#include "shapes2toon/errors.hpp"
#include "shapes2toon/fid.hpp"
#include "shapes2toon/fit.hpp"
#include "shapes2toon/nn/checkpoint.hpp"
#include "shapes2toon/shape.hpp"
#include "shapes2toon/toon.hpp"
#include "shapes2toon/train.hpp"

namespace py = pybind11;
using namespace s2t;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FloatArray to_numpy(const RasterImage& img) {
  FloatArray out({img.height(), img.width(), img.channels()});
  std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
  return out;
}

// Accepts HxW or HxWxC float arrays with values in [0,1].
RasterImage from_numpy(const FloatArray& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw ValidationError("image must be HxW or HxWxC", "image");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  const int c = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  if (c != 1 && c != 3) throw ValidationError("image must have 1 or 3 channels", "image");
  RasterImage img(w, h, c);
  std::copy(a.data(), a.data() + a.size(), img.pixels().begin());
  return img;
}

shape::ShapeLayout parse(const std::string& layout_json) {
  auto layout = shape::parse_layout(layout_json);
  layout.validate();
  return layout;
}

class Model {
 public:
  explicit Model(const std::filesystem::path& checkpoint)
      : generator_(nn::load_generator(checkpoint, &info_)) {}

  FloatArray translate(const FloatArray& source, std::uint64_t seed) const {
    RasterImage out;
    {
      const RasterImage in = from_numpy(source);
      py::gil_scoped_release release;
      out = train::translate(generator_, in, seed);
    }
    return to_numpy(out);
  }

  FloatArray translate_layout(const std::string& layout_json, std::uint64_t seed) const {
    const int size = generator_.config().image_size;
    const RasterImage src = shape::rasterize(parse(layout_json), size, size);
    RasterImage out;
    {
      py::gil_scoped_release release;
      out = train::translate(generator_, src, seed);
    }
    return to_numpy(out);
  }

  int image_size() const { return generator_.config().image_size; }
  const std::string& id() const { return info_.id; }
  long step() const { return info_.step; }

 private:
  nn::CheckpointInfo info_;
  nn::UNetGenerator<float> generator_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shape layouts, toon synthesis, Hough fitting and pix2pix inference.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", validation.ptr());

  m.def(
      "sample_layout", [](std::uint64_t seed) { return shape::serialize_layout(toon::sample_layout(seed)); },
      py::arg("seed"), "Random mouse-face layout as JSON.");
  m.def(
      "validate_layout", [](const std::string& layout_json) { parse(layout_json); }, py::arg("layout"),
      "Raises ValidationError with the offending field path.");
  m.def(
      "rasterize",
      [](const std::string& layout_json, int size) { return to_numpy(shape::rasterize(parse(layout_json), size, size)); },
      py::arg("layout"), py::arg("size") = 256, "Outline drawing, HxWx3 float32 in [0,1].");
  m.def(
      "render_toon",
      [](const std::string& layout_json, int size) {
        return to_numpy(toon::render_toon(parse(layout_json), toon::ToonStyle::mouse(), size, size));
      },
      py::arg("layout"), py::arg("size") = 256);
  m.def(
      "fit_layout",
      [](const FloatArray& image) {
        const RasterImage img = from_numpy(image);
        shape::ShapeLayout layout;
        {
          py::gil_scoped_release release;
          layout = fit::fit_layout(img, fit::HoughConfig{});
        }
        return shape::serialize_layout(layout);
      },
      py::arg("image"), "Recover circles and ovals from a drawing; returns layout JSON.");
  m.def(
      "frechet_distance",
      [](const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1, const Eigen::VectorXd& mu2,
         const Eigen::MatrixXd& sigma2) {
        return fid::frechet_distance(fid::EmbeddingSet::from_moments(mu1, sigma1),
                                     fid::EmbeddingSet::from_moments(mu2, sigma2));
      },
      py::arg("mu1"), py::arg("sigma1"), py::arg("mu2"), py::arg("sigma2"));
  m.def(
      "frechet_distance_samples",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return fid::frechet_distance(fid::EmbeddingSet::from_samples(a), fid::EmbeddingSet::from_samples(b));
      },
      py::arg("a"), py::arg("b"), "Rows are samples.");
  m.def(
      "build_corpus",
      [](int n, std::uint64_t seed, const std::filesystem::path& out, int size) {
        toon::CorpusOptions opts;
        opts.image_size = size;
        py::gil_scoped_release release;
        return toon::build_corpus(n, seed, out, opts).size();
      },
      py::arg("n"), py::arg("seed"), py::arg("out_dir"), py::arg("image_size") = 256,
      "Writes n base pairs; returns the pair count.");
  m.def(
      "expand_corpus",
      [](const std::filesystem::path& in, const std::filesystem::path& out, int per_base, std::uint64_t seed) {
        augment::AugmentationPlan plan;
        plan.per_base = per_base;
        plan.rng_seed = seed;
        py::gil_scoped_release release;
        return augment::expand_corpus(in, corpus::CorpusManifest::load(in), plan, out).size();
      },
      py::arg("base_dir"), py::arg("out_dir"), py::arg("per_base") = 15, py::arg("seed") = 0);
  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return cli::run(args);
      },
      py::arg("args"), "Run a CLI subcommand; returns the exit code.");

  py::class_<Model>(m, "Model")
      .def(py::init<const std::filesystem::path&>(), py::arg("checkpoint"))
      .def("translate", &Model::translate, py::arg("source"), py::arg("seed") = 0,
           "Translate an HxWx3 drawing into a toon at the model resolution.")
      .def("translate_layout", &Model::translate_layout, py::arg("layout"), py::arg("seed") = 0)
      .def_property_readonly("image_size", &Model::image_size)
      .def_property_readonly("id", &Model::id)
      .def_property_readonly("step", &Model::step);
}
