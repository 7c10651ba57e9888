#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odt/analysis.hpp"
#include "odt/types.hpp"

namespace odt {

/// 8-bit RGB raster, row-major from the top row.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

void write_png(const std::string& path, const Image& image);

/// Bilogarithmic scatter of (residual, tv) joined in lambda order, with
/// decade ticks; points shaded from dark (small lambda) to light.
Image plot_lcurve(const std::vector<LcurvePoint>& points, int width = 480, int height = 360);

/// Grayscale slice through the center along `axis` (3D) or the whole image
/// (2D), mapped linearly from [lo, hi]. Rows run along x1, columns along the
/// last axis; each sample becomes a scale x scale block.
Image slice_image(const ScatteringPotential& f, double lo, double hi, int axis = 2, int scale = 4);

}  // namespace odt
