#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ocreid {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
  using Error::Error;
};
class IntegrityError : public Error {
public:
  using Error::Error;
};
class ConfigError : public Error {
public:
  using Error::Error;
};
class ShapeError : public Error {
public:
  using Error::Error;
};
class LabelError : public Error {
public:
  using Error::Error;
};
class NumericError : public Error {
public:
  using Error::Error;
};
class ContractError : public Error {
public:
  using Error::Error;
};
class ParseError : public Error {
public:
  using Error::Error;
};
// Raised when a parsing map has no foreground component to occlude.
class NoComponentError : public Error {
public:
  using Error::Error;
};

using Rng = std::mt19937_64;

// FNV-1a, used to derive stable per-file rng substreams from string keys.
// std::hash is implementation defined and would break cross-build determinism.
uint64_t fnv1a64(std::string_view s);

// Mixes a base seed with a stream tag into an independent substream seed.
uint64_t mix_seed(uint64_t seed, std::string_view stream);
uint64_t mix_seed(uint64_t seed, std::string_view stream, uint64_t n);

Rng make_rng(uint64_t seed);

}  // namespace ocreid
