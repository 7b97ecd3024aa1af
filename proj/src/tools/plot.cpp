#include "aiops/tools/plot.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

#include "aiops/util/text.hpp"

namespace aiops::tools {

std::string plot_file_name(std::string_view metric, double start, double end, PlotFormat format) {
  return "FILE-plot-" + std::string(metric) + "-" + std::to_string(static_cast<long long>(std::floor(start))) + "-" +
         std::to_string(static_cast<long long>(std::floor(end))) + "." + extension(format);
}

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 400;
constexpr int kMargin = 40;
constexpr int kTicks = 5;

struct Frame {
  double t0, t1, v0, v1;

  double x(double t) const { return kMargin + (t - t0) / (t1 - t0) * (kWidth - 2 * kMargin); }
  double y(double v) const { return kHeight - kMargin - (v - v0) / (v1 - v0) * (kHeight - 2 * kMargin); }
};

Frame frame_for(std::span<const Sample> points) {
  Frame f{points.front().timestamp, points.back().timestamp, points.front().value, points.front().value};
  for (const auto& p : points) {
    f.v0 = std::min(f.v0, p.value);
    f.v1 = std::max(f.v1, p.value);
  }
  if (f.t1 <= f.t0) f.t1 = f.t0 + 1.0;
  if (f.v1 <= f.v0) f.v1 = f.v0 + 1.0;
  return f;
}

struct Raster {
  std::vector<unsigned char> rgb = std::vector<unsigned char>(kWidth * kHeight * 3, 255);

  void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || y < 0 || x >= kWidth || y >= kHeight) return;
    auto* px = &rgb[(static_cast<std::size_t>(y) * kWidth + x) * 3];
    px[0] = r;
    px[1] = g;
    px[2] = b;
  }

  void line(int x0, int y0, int x1, int y1, unsigned char r, unsigned char g, unsigned char b) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }
};

void write_png(const std::filesystem::path& path, std::span<const Sample> points) {
  const auto f = frame_for(points);
  Raster img;
  const int left = kMargin, bottom = kHeight - kMargin, right = kWidth - kMargin, top = kMargin;
  img.line(left, bottom, right, bottom, 0, 0, 0);
  img.line(left, bottom, left, top, 0, 0, 0);
  for (int i = 0; i <= kTicks; ++i) {
    const int x = left + i * (right - left) / kTicks;
    const int y = bottom - i * (bottom - top) / kTicks;
    img.line(x, bottom, x, bottom + 5, 0, 0, 0);
    img.line(left - 5, y, left, y, 0, 0, 0);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int x = static_cast<int>(std::lround(f.x(points[i].timestamp)));
    const int y = static_cast<int>(std::lround(f.y(points[i].value)));
    if (i == 0) {
      img.set(x, y, 31, 119, 180);
      continue;
    }
    const int px = static_cast<int>(std::lround(f.x(points[i - 1].timestamp)));
    const int py = static_cast<int>(std::lround(f.y(points[i - 1].value)));
    img.line(px, py, x, y, 31, 119, 180);
  }

  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, kWidth, kHeight, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < kHeight; ++y) png_write_row(png, &img.rgb[static_cast<std::size_t>(y) * kWidth * 3]);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_svg(const std::filesystem::path& path, std::span<const Sample> points) {
  const auto f = frame_for(points);
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
                    std::to_string(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const int left = kMargin, bottom = kHeight - kMargin, right = kWidth - kMargin, top = kMargin;
  svg += "<path stroke=\"black\" fill=\"none\" d=\"M" + std::to_string(left) + " " + std::to_string(top) + " L" +
         std::to_string(left) + " " + std::to_string(bottom) + " L" + std::to_string(right) + " " +
         std::to_string(bottom) + "\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double t = f.t0 + (f.t1 - f.t0) * i / kTicks;
    const double v = f.v0 + (f.v1 - f.v0) * i / kTicks;
    const int x = left + i * (right - left) / kTicks;
    const int y = bottom - i * (bottom - top) / kTicks;
    svg += "<line stroke=\"black\" x1=\"" + std::to_string(x) + "\" y1=\"" + std::to_string(bottom) + "\" x2=\"" +
           std::to_string(x) + "\" y2=\"" + std::to_string(bottom + 5) + "\"/>";
    svg += "<text font-size=\"9\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(bottom + 16) +
           "\" text-anchor=\"middle\">" + text::shortest(std::floor(t)) + "</text>\n";
    svg += "<line stroke=\"black\" x1=\"" + std::to_string(left - 5) + "\" y1=\"" + std::to_string(y) + "\" x2=\"" +
           std::to_string(left) + "\" y2=\"" + std::to_string(y) + "\"/>";
    svg += "<text font-size=\"9\" x=\"" + std::to_string(left - 7) + "\" y=\"" + std::to_string(y) +
           "\" text-anchor=\"end\">" + text::fixed(v, 2) + "</text>\n";
  }
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) svg += ' ';
    svg += text::fixed(f.x(points[i].timestamp), 2) + "," + text::fixed(f.y(points[i].value), 2);
  }
  svg += "\"/>\n</svg>\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << svg;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, std::span<const Sample> points, PlotFormat format) {
  if (points.empty()) throw std::invalid_argument("no points to plot");
  if (format == PlotFormat::Png) {
    write_png(path, points);
  } else {
    write_svg(path, points);
  }
}

}  // namespace aiops::tools
