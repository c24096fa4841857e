#pragma once

#include <functional>
#include <vector>

#include "ocreid/tensor.hpp"

namespace ocreid {

// Handle into a Tape node.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. One Tape per forward pass; leaves carry parameter or
// input tensors, ops append nodes, backward() fills gradients in reverse
// construction order. Single-threaded by construction.
class Tape {
public:
  Var leaf(Tensor value, bool requires_grad = false);

  // x:[N,Ci,H,W]  w:[Co,Ci,kh,kw]  b:[Co]  ->  [N,Co,Ho,Wo]
  Var conv2d(Var x, Var w, Var b, int stride, int pad);
  Var relu(Var x);
  Var sigmoid(Var x);
  // Per-channel batch normalization over (N,H,W). In train mode uses batch
  // statistics and updates the provided running stats in place; in eval mode
  // normalizes with the running stats.
  Var batchnorm(Var x, Var gamma, Var beta, Tensor* running_mean, Tensor* running_var,
                bool train_mode, double momentum = 0.1, double eps = 1e-5);
  Var spatial_mean(Var x);  // [N,C,H,W] -> [N,C], plain average over H*W
  Var slice_h(Var x, int h0, int h1);
  Var scale_channels(Var x, Var s);  // x:[N,C,h,W] * s:[N,C] broadcast
  Var stack_parts(const std::vector<Var>& parts);  // k x [N,C] -> [N,k,C]
  Var mean_parts(Var x);                           // [N,k,C] -> [N,C]
  Var linear(Var x, Var w, Var b);                 // [N,C],[O,C],[O] -> [N,O]
  Var detach(Var x);
  Var screen_scores(Var x, double threshold);  // zero every entry strictly below threshold
  Var mean_all(Var x);                         // -> scalar
  Var sum_all(Var x);                          // -> scalar
  Var add(Var a, Var b);
  Var add_in_order(const std::vector<Var>& scalars);  // left-to-right scalar sum
  Var constant_scalar(double v);

  // Escape hatch for custom differentiable ops (losses live outside this TU).
  // The backprop callback receives the tape and the id of the created node.
  Var custom(Tensor value, std::vector<Var> parents,
             std::function<void(Tape&, int)> backprop, bool force_no_grad = false);

  void backward(Var loss);

  const Tensor& value(Var v) const;
  double scalar(Var v) const;
  const Tensor& grad(Var v) const;
  Tensor& grad_mut(Var v);
  bool requires_grad(Var v) const;
  size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<int> parents;
    std::function<void(Tape&, int)> backprop;
  };
  std::vector<Node> nodes_;

  Var make(Tensor value, std::vector<int> parents, std::function<void(Tape&, int)> fn,
           bool force_no_grad = false);
  const Node& node(Var v) const;
};

}  // namespace ocreid
