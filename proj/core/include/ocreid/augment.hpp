#pragma once

#include <cstdint>

#include "ocreid/common.hpp"
#include "ocreid/image.hpp"

namespace ocreid {

struct AugmentConfig {
  double flip_prob = 0.5;
  int crop_padding = 4;
  double erase_prob = 0.5;
  double erase_area_lo = 0.02;
  double erase_area_hi = 0.2;
  uint64_t seed = 0;

  void validate() const;
};

// Horizontal flip, pad-and-crop, random erasing (noise fill), in that order.
// All randomness comes from the caller's rng; the output shape equals the
// input shape.
Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng);

}  // namespace ocreid
