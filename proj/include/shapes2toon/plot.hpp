#pragma once

#include <filesystem>
#include <string>

#include "shapes2toon/image.hpp"
#include "shapes2toon/train.hpp"

namespace s2t::plot {

// Three panels (generator adversarial, discriminator, L1) against step.
std::string loss_curves_svg(const train::LossLog& log, int width = 960, int height = 320);
RasterImage loss_curves_raster(const train::LossLog& log, int width = 960, int height = 320);

// Format follows the extension: .svg or .png.
void write_loss_curves(const train::LossLog& log, const std::filesystem::path& out);

}  // namespace s2t::plot
