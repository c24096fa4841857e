#include "ocreid/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "ocreid/common.hpp"

namespace ocreid {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t to_byte(double v) {
  double c = std::clamp(v, 0.0, 1.0);
  return static_cast<uint8_t>(std::lround(c * 255.0));
}

// Reads a PNG into 8-bit rows with the requested channel layout.
// want_gray selects a single-channel read; otherwise RGB.
std::vector<std::vector<uint8_t>> read_png_rows(const std::string& path, bool want_gray, int* out_h,
                                                int* out_w) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open image file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng read init failed: " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng info init failed: " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG: " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (want_gray) {
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  } else {
    if (!(color & PNG_COLOR_MASK_COLOR)) png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<std::vector<uint8_t>> rows(h, std::vector<uint8_t>(rowbytes));
  std::vector<png_bytep> row_ptrs(h);
  for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  *out_h = static_cast<int>(h);
  *out_w = static_cast<int>(w);
  return rows;
}

void write_png_rows(const std::string& path, int h, int w, int color_type,
                    const std::vector<std::vector<uint8_t>>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open file for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng write init failed: " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng info init failed: " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG: " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> row_ptrs(h);
  for (int y = 0; y < h; ++y) row_ptrs[y] = const_cast<png_bytep>(rows[y].data());
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image load_image_png(const std::string& path) {
  int h = 0, w = 0;
  auto rows = read_png_rows(path, /*want_gray=*/false, &h, &w);
  Image img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(y, x, c) = rows[y][static_cast<size_t>(x) * 3 + c] / 255.0;
      }
    }
  }
  return img;
}

void save_image_png(const std::string& path, const Image& img) {
  std::vector<std::vector<uint8_t>> rows(img.height,
                                         std::vector<uint8_t>(static_cast<size_t>(img.width) * 3));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        rows[y][static_cast<size_t>(x) * 3 + c] = to_byte(img.at(y, x, c));
      }
    }
  }
  write_png_rows(path, img.height, img.width, PNG_COLOR_TYPE_RGB, rows);
}

LabelImage load_label_png(const std::string& path) {
  int h = 0, w = 0;
  auto rows = read_png_rows(path, /*want_gray=*/true, &h, &w);
  LabelImage map(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) map.at(y, x) = rows[y][x];
  }
  return map;
}

void save_label_png(const std::string& path, const LabelImage& map) {
  std::vector<std::vector<uint8_t>> rows(map.height, std::vector<uint8_t>(map.width));
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) rows[y][x] = map.at(y, x);
  }
  write_png_rows(path, map.height, map.width, PNG_COLOR_TYPE_GRAY, rows);
}

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  if (src.height == out_h && src.width == out_w) return src;
  if (src.height <= 0 || src.width <= 0 || out_h <= 0 || out_w <= 0) {
    throw ShapeError("resize_bilinear: empty image");
  }
  Image dst(out_h, out_w);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y1 = std::min(y0 + 1, src.height - 1);
    y0 = std::clamp(y0, 0, src.height - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x1 = std::min(x0 + 1, src.width - 1);
      x0 = std::clamp(x0, 0, src.width - 1);
      for (int c = 0; c < 3; ++c) {
        double top = src.at(y0, x0, c) * (1 - wx) + src.at(y0, x1, c) * wx;
        double bot = src.at(y1, x0, c) * (1 - wx) + src.at(y1, x1, c) * wx;
        dst.at(y, x, c) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return dst;
}

}  // namespace ocreid
