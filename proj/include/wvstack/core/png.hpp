#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "wvstack/core/error.hpp"
#include "wvstack/core/raster.hpp"

namespace wvstack {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit, 3-band PNG. No timestamp chunk, so output is reproducible.
inline void write_png(const std::filesystem::path& path, const Raster<Rgb>& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error(Errc::Io, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    std::fclose(fp);
    throw Error(Errc::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(Errc::Io, "libpng failed writing " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols()), static_cast<png_uint_32>(image.rows()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < image.rows(); ++r) {
    auto* row = reinterpret_cast<png_bytep>(const_cast<Rgb*>(image.row(r).data()));
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

/// Minimal raster plotting surface for QA figures: data-space axes, markers,
/// lines and error bars. No text rendering.
class PlotCanvas {
 public:
  PlotCanvas(int width, int height, double x0, double x1, double y0, double y1)
      : img_(static_cast<std::size_t>(height), static_cast<std::size_t>(width), Rgb{255, 255, 255}),
        x0_(x0), x1_(x1 == x0 ? x0 + 1 : x1), y0_(y0), y1_(y1 == y0 ? y0 + 1 : y1) {
    const Rgb grey{160, 160, 160};
    for (int x = margin; x < width - margin; ++x) {
      put(x, margin, grey);
      put(x, height - margin, grey);
    }
    for (int y = margin; y <= height - margin; ++y) {
      put(margin, y, grey);
      put(width - margin, y, grey);
    }
    if (y0_ < 0 && y1_ > 0) line(x0_, 0.0, x1_, 0.0, Rgb{210, 210, 210});
  }

  void marker(double x, double y, Rgb color, int radius = 3) {
    const int px = to_px(x), py = to_py(y);
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx)
        if (dx * dx + dy * dy <= radius * radius) put(px + dx, py + dy, color);
  }

  void line(double xa, double ya, double xb, double yb, Rgb color) {
    int ax = to_px(xa), ay = to_py(ya);
    const int bx = to_px(xb), by = to_py(yb);
    const int dx = std::abs(bx - ax), sx = ax < bx ? 1 : -1;
    const int dy = -std::abs(by - ay), sy = ay < by ? 1 : -1;
    int err = dx + dy;
    for (;;) {
      put(ax, ay, color);
      if (ax == bx && ay == by) break;
      const int e2 = 2 * err;
      if (e2 >= dy) { err += dy; ax += sx; }
      if (e2 <= dx) { err += dx; ay += sy; }
    }
  }

  void error_bar(double x, double y, double sigma, Rgb color) {
    line(x, y - sigma, x, y + sigma, color);
    const double half = (x1_ - x0_) * 0.005;
    line(x - half, y - sigma, x + half, y - sigma, color);
    line(x - half, y + sigma, x + half, y + sigma, color);
  }

  const Raster<Rgb>& image() const { return img_; }

 private:
  static constexpr int margin = 24;

  int to_px(double x) const {
    const double w = static_cast<double>(img_.cols()) - 2.0 * margin;
    return margin + static_cast<int>(std::lround((x - x0_) / (x1_ - x0_) * w));
  }
  int to_py(double y) const {
    const double h = static_cast<double>(img_.rows()) - 2.0 * margin;
    return static_cast<int>(img_.rows()) - margin - static_cast<int>(std::lround((y - y0_) / (y1_ - y0_) * h));
  }
  void put(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= static_cast<int>(img_.cols()) || y >= static_cast<int>(img_.rows())) return;
    img_(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = c;
  }

  Raster<Rgb> img_;
  double x0_, x1_, y0_, y1_;
};

/// Blue-white-red diverging ramp for t in [-1, 1].
inline Rgb diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  const auto lerp = [](double a, double b, double u) { return static_cast<std::uint8_t>(std::lround(a + (b - a) * u)); };
  if (t < 0) return {lerp(255, 33, -t), lerp(255, 102, -t), lerp(255, 172, -t)};
  return {lerp(255, 178, t), lerp(255, 24, t), lerp(255, 43, t)};
}

}  // namespace wvstack
