#include "ocreid/augment.hpp"

#include <algorithm>
#include <cmath>

namespace ocreid {

void AugmentConfig::validate() const {
  if (flip_prob < 0.0 || flip_prob > 1.0) throw ConfigError("flip_prob outside [0,1]");
  if (erase_prob < 0.0 || erase_prob > 1.0) throw ConfigError("erase_prob outside [0,1]");
  if (crop_padding < 0) throw ConfigError("crop_padding must be >= 0");
  if (erase_prob > 0.0) {
    if (!(erase_area_lo > 0.0 && erase_area_hi < 1.0 && erase_area_lo <= erase_area_hi)) {
      throw ConfigError("erase_area_range must be an ordered interval within (0,1)");
    }
  }
}

namespace {

Image flip_horizontal(const Image& img) {
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    }
  }
  return out;
}

// Pad by replicating edges, then crop back to the original size at a random
// offset.
Image random_crop(const Image& img, int pad, Rng& rng) {
  std::uniform_int_distribution<int> off(0, 2 * pad);
  const int dy = off(rng) - pad;
  const int dx = off(rng) - pad;
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    const int sy = std::clamp(y + dy, 0, img.height - 1);
    for (int x = 0; x < img.width; ++x) {
      const int sx = std::clamp(x + dx, 0, img.width - 1);
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

void random_erase(Image& img, const AugmentConfig& cfg, Rng& rng) {
  const int total = img.height * img.width;
  std::uniform_int_distribution<int> pick_h(1, img.height);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Sample integer box dimensions whose realized area fraction provably lies
  // in [erase_area_lo, erase_area_hi]; rounding a continuous target can land
  // outside the interval on small images.
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int h = pick_h(rng);
    const int w_lo = std::max(1, static_cast<int>(std::ceil(cfg.erase_area_lo * total / h)));
    const int w_hi = std::min(img.width, static_cast<int>(std::floor(cfg.erase_area_hi * total / h)));
    if (w_lo > w_hi) continue;
    std::uniform_int_distribution<int> pick_w(w_lo, w_hi);
    const int w = pick_w(rng);
    std::uniform_int_distribution<int> pick_y(0, img.height - h);
    std::uniform_int_distribution<int> pick_x(0, img.width - w);
    const int y0 = pick_y(rng);
    const int x0 = pick_x(rng);
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = unit(rng);
      }
    }
    return;
  }
}

}  // namespace

Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Image out = img;
  if (cfg.flip_prob > 0.0 && unit(rng) < cfg.flip_prob) out = flip_horizontal(out);
  if (cfg.crop_padding > 0) out = random_crop(out, cfg.crop_padding, rng);
  if (cfg.erase_prob > 0.0 && unit(rng) < cfg.erase_prob) random_erase(out, cfg, rng);
  return out;
}

}  // namespace ocreid
