#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ocreid {

// Dense row-major double tensor. Small and deliberately simple: every model
// quantity here fits comfortably in memory at desk scale.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double value);

  size_t numel() const { return v.size(); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  // Flat index helpers for the common ranks.
  double& at2(int a, int b) { return v[static_cast<size_t>(a) * shape[1] + b]; }
  double at2(int a, int b) const { return v[static_cast<size_t>(a) * shape[1] + b]; }
  double& at3(int a, int b, int c) {
    return v[(static_cast<size_t>(a) * shape[1] + b) * shape[2] + c];
  }
  double at3(int a, int b, int c) const {
    return v[(static_cast<size_t>(a) * shape[1] + b) * shape[2] + c];
  }
  double& at4(int a, int b, int c, int d) {
    return v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }
  double at4(int a, int b, int c, int d) const {
    return v[((static_cast<size_t>(a) * shape[1] + b) * shape[2] + c) * shape[3] + d];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
  void fill(double value);

  std::string shape_str() const;
};

size_t shape_numel(const std::vector<int>& shape);

}  // namespace ocreid
