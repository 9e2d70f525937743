#include "core/plot.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>

#include "core/error.hpp"

namespace kswap {

namespace {

using Rgb = std::array<unsigned char, 3>;

struct Canvas {
  int width, height;
  std::vector<unsigned char> pixels;

  Canvas(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w * h * 3), 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    auto* p = &pixels[static_cast<std::size_t>((y * width + x) * 3)];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  void dot(int x, int y, Rgb c, int r) {
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) set(x + dx, y + dy, c);
  }

  void line(int x0, int y0, int x1, int y1, Rgb c, int r = 0) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      dot(x0, y0, c, r);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  }
};

constexpr std::array<Rgb, 6> kPalette{{{31, 119, 180}, {214, 39, 40}, {44, 160, 44},
                                       {255, 127, 14}, {148, 103, 189}, {140, 86, 75}}};

void write_png(const Canvas& canvas, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  require(file != nullptr, ErrorCode::Io, "cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::Internal, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::Io, "libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(canvas.width),
               static_cast<png_uint_32>(canvas.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < canvas.height; ++y)
    png_write_row(png, const_cast<png_bytep>(&canvas.pixels[static_cast<std::size_t>(y * canvas.width * 3)]));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void render_curves_png(const std::vector<BetaCurve>& curves, const std::filesystem::path& path,
                       int width, int height) {
  require(width >= 100 && height >= 100, ErrorCode::InvalidArgument, "plot is too small");
  Canvas canvas(width, height);
  const int left = 50, right = width - 20, top = 20, bottom = height - 40;

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      lo = any ? std::min(lo, p.beta) : p.beta;
      hi = any ? std::max(hi, p.beta) : p.beta;
      any = true;
    }
  if (!any || hi == lo) hi = lo + 1.0;

  auto px = [&](double beta) {
    return left + static_cast<int>(std::lround((beta - lo) / (hi - lo) * (right - left)));
  };
  auto py = [&](double score) {
    return bottom - static_cast<int>(std::lround(std::clamp(score, 0.0, 1.0) * (bottom - top)));
  };

  for (int k = 1; k <= 4; ++k) canvas.line(left, py(0.25 * k), right, py(0.25 * k), {225, 225, 225});
  canvas.line(left, bottom, right, bottom, {0, 0, 0});
  canvas.line(left, top, left, bottom, {0, 0, 0});
  for (int k = 0; k <= 4; ++k) canvas.line(left - 5, py(0.25 * k), left, py(0.25 * k), {0, 0, 0});

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const Rgb colour = kPalette[i % kPalette.size()];
    const auto& pts = curves[i].points;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      canvas.line(px(pts[j].beta), bottom, px(pts[j].beta), bottom + 5, {0, 0, 0});
      if (j > 0)
        canvas.line(px(pts[j - 1].beta), py(pts[j - 1].score), px(pts[j].beta), py(pts[j].score),
                    colour, 1);
      canvas.dot(px(pts[j].beta), py(pts[j].score), colour, 3);
    }
  }
  write_png(canvas, path);
}

}  // namespace kswap
