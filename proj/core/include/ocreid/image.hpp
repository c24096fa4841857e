#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ocreid {

// Interleaved RGB image, values in [0,1]. Row-major, (y, x, channel).
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> px;

  Image() = default;
  Image(int h, int w) : height(h), width(w), px(static_cast<size_t>(h) * w * 3, 0.0) {}

  double& at(int y, int x, int c) { return px[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  double at(int y, int x, int c) const { return px[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  bool same_shape(const Image& o) const { return height == o.height && width == o.width; }
};

// Single-channel 8-bit label image (body-component ids, mask values, ...).
struct LabelImage {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> labels;

  LabelImage() = default;
  LabelImage(int h, int w, uint8_t fill = 0)
      : height(h), width(w), labels(static_cast<size_t>(h) * w, fill) {}

  uint8_t& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
};

Image load_image_png(const std::string& path);
void save_image_png(const std::string& path, const Image& img);

LabelImage load_label_png(const std::string& path);
void save_label_png(const std::string& path, const LabelImage& map);

Image resize_bilinear(const Image& src, int out_h, int out_w);

}  // namespace ocreid
