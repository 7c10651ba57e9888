#include "odt/plot.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace odt {

namespace {

void draw_line(Image& img, int x0, int y0, int x1, int y1, std::uint8_t c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    img.set(x0, y0, c, c, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

struct LogAxis {
  double lo, hi;
  int p0, p1;  // pixel positions of lo and hi

  int map(double v) const {
    const double t = (std::log10(v) - lo) / (hi - lo);
    return static_cast<int>(std::lround(p0 + t * (p1 - p0)));
  }
};

LogAxis make_axis(double vmin, double vmax, int p0, int p1) {
  double lo = std::floor(std::log10(vmin));
  double hi = std::ceil(std::log10(vmax));
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi, p0, p1};
}

}  // namespace

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

void write_png(const std::string& path, const Image& image) {
  if (image.width <= 0 || image.height <= 0) throw std::invalid_argument("write_png: empty image");
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("write_png: cannot open '" + path + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("write_png: libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: libpng error writing '" + path + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y)
    png_write_row(png, image.rgb.data() + static_cast<std::size_t>(y) * image.width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image plot_lcurve(const std::vector<LcurvePoint>& points, int width, int height) {
  Image img(width, height);
  const int left = 50, right = width - 20, top = 20, bottom = height - 40;
  std::vector<const LcurvePoint*> ok;
  for (const auto& p : points)
    if (p.residual > 0.0 && p.tv > 0.0 && std::isfinite(p.residual) && std::isfinite(p.tv))
      ok.push_back(&p);

  draw_line(img, left, bottom, right, bottom, 0);
  draw_line(img, left, bottom, left, top, 0);
  if (ok.empty()) return img;

  double rmin = ok[0]->residual, rmax = rmin, tmin = ok[0]->tv, tmax = tmin;
  for (const auto* p : ok) {
    rmin = std::min(rmin, p->residual);
    rmax = std::max(rmax, p->residual);
    tmin = std::min(tmin, p->tv);
    tmax = std::max(tmax, p->tv);
  }
  const LogAxis ax = make_axis(rmin, rmax, left, right);
  const LogAxis ay = make_axis(tmin, tmax, bottom, top);

  for (double e = ax.lo; e <= ax.hi + 0.5; e += 1.0) {
    const int x = ax.map(std::pow(10.0, e));
    draw_line(img, x, bottom, x, bottom + 6, 0);
    for (int y = top; y < bottom; y += 4) img.set(x, y, 220, 220, 220);
  }
  for (double e = ay.lo; e <= ay.hi + 0.5; e += 1.0) {
    const int y = ay.map(std::pow(10.0, e));
    draw_line(img, left - 6, y, left, y, 0);
    for (int x = left + 1; x <= right; x += 4) img.set(x, y, 220, 220, 220);
  }

  for (std::size_t i = 1; i < ok.size(); ++i)
    draw_line(img, ax.map(ok[i - 1]->residual), ay.map(ok[i - 1]->tv), ax.map(ok[i]->residual),
              ay.map(ok[i]->tv), 150);
  for (std::size_t i = 0; i < ok.size(); ++i) {
    const double t = ok.size() > 1 ? static_cast<double>(i) / (ok.size() - 1) : 0.0;
    const auto shade = static_cast<std::uint8_t>(std::lround(200.0 * t));
    const int cx = ax.map(ok[i]->residual), cy = ay.map(ok[i]->tv);
    for (int dy = -2; dy <= 2; ++dy)
      for (int dx = -2; dx <= 2; ++dx)
        if (dx * dx + dy * dy <= 5) img.set(cx + dx, cy + dy, shade, shade, 255);
  }
  return img;
}

Image slice_image(const ScatteringPotential& f, double lo, double hi, int axis, int scale) {
  if (!(hi > lo)) throw std::invalid_argument("slice_image: need hi > lo");
  if (scale < 1) throw std::invalid_argument("slice_image: scale must be positive");
  if (f.dim == 3 && (axis < 0 || axis > 2)) throw std::invalid_argument("slice_image: bad axis");
  const int K = f.K;
  Image img(K * scale, K * scale);
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c) {
      std::size_t k;
      if (f.dim == 2) {
        k = static_cast<std::size_t>(r) * K + c;
      } else {
        std::array<int, 3> idx{0, 0, 0};
        int free_axes[2], n = 0;
        for (int a = 0; a < 3; ++a)
          if (a != axis) free_axes[n++] = a;
        idx[free_axes[0]] = r - K / 2;
        idx[free_axes[1]] = c - K / 2;
        idx[axis] = 0;
        k = flatten(idx, K, 3);
      }
      const double t = std::clamp((f.values[k] - lo) / (hi - lo), 0.0, 1.0);
      const auto v = static_cast<std::uint8_t>(std::lround(255.0 * t));
      for (int dy = 0; dy < scale; ++dy)
        for (int dx = 0; dx < scale; ++dx) img.set(c * scale + dx, r * scale + dy, v, v, v);
    }
  return img;
}

}  // namespace odt
