#include "ocreid/common.hpp"

namespace ocreid {

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {
// splitmix64 finalizer; decorrelates nearby seeds.
uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

uint64_t mix_seed(uint64_t seed, std::string_view stream) {
  return mix64(seed ^ fnv1a64(stream));
}

uint64_t mix_seed(uint64_t seed, std::string_view stream, uint64_t n) {
  return mix64(mix_seed(seed, stream) + 0x632be59bd9b4e019ULL * (n + 1));
}

Rng make_rng(uint64_t seed) { return Rng(seed); }

}  // namespace ocreid
