#include "ocreid/tensor.hpp"

#include <cmath>
#include <sstream>

#include "ocreid/common.hpp"

namespace ocreid {

size_t shape_numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative tensor dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)), v(shape_numel(shape), 0.0) {}

Tensor Tensor::full(std::vector<int> s, double value) {
  Tensor t(std::move(s));
  t.fill(value);
  return t;
}

bool Tensor::all_finite() const {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void Tensor::fill(double value) {
  for (double& x : v) x = value;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

}  // namespace ocreid
