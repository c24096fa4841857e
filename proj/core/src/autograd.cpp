#include "ocreid/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "ocreid/common.hpp"

namespace ocreid {

namespace {

int ceil_div(int a, int b) {  // b > 0
  return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}
int floor_div(int a, int b) {  // b > 0
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

// Valid output-row range [lo, hi) so that in = out*stride + off lies in [0, n).
std::pair<int, int> valid_range(int n_in, int n_out, int stride, int off) {
  int lo = std::max(0, ceil_div(-off, stride));
  int hi = std::min(n_out, floor_div(n_in - 1 - off, stride) + 1);
  return {lo, std::max(lo, hi)};
}

}  // namespace

Var Tape::make(Tensor value, std::vector<int> parents, std::function<void(Tape&, int)> fn,
               bool force_no_grad) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.backprop = std::move(fn);
  if (!force_no_grad) {
    for (int p : n.parents) {
      if (nodes_[static_cast<size_t>(p)].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || static_cast<size_t>(v.id) >= nodes_.size()) {
    throw Error("invalid tape variable");
  }
  return nodes_[static_cast<size_t>(v.id)];
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  const Tensor& t = node(v).value;
  if (t.numel() != 1) throw ShapeError("scalar() on tensor of shape " + t.shape_str());
  return t.v[0];
}

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.numel() == 0) throw Error("gradient not computed; call backward first");
  return n.grad;
}

Tensor& Tape::grad_mut(Var v) { return nodes_[static_cast<size_t>(v.id)].grad; }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var Tape::custom(Tensor value, std::vector<Var> parents, std::function<void(Tape&, int)> backprop,
                 bool force_no_grad) {
  std::vector<int> ids;
  ids.reserve(parents.size());
  for (Var p : parents) {
    node(p);  // validity check
    ids.push_back(p.id);
  }
  return make(std::move(value), std::move(ids), std::move(backprop), force_no_grad);
}

void Tape::backward(Var loss) {
  const Node& ln = node(loss);
  if (ln.value.numel() != 1) {
    throw ShapeError("backward() expects a scalar loss, got " + ln.value.shape_str());
  }
  for (size_t i = 0; i <= static_cast<size_t>(loss.id); ++i) {
    nodes_[i].grad = Tensor::zeros(nodes_[i].value.shape);
  }
  nodes_[static_cast<size_t>(loss.id)].grad.v[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.requires_grad && n.backprop) n.backprop(*this, i);
  }
}

// ---------------------------------------------------------------------------
// ops
// ---------------------------------------------------------------------------

Var Tape::conv2d(Var xv, Var wv, Var bv, int stride, int pad) {
  const Tensor& x = value(xv);
  const Tensor& w = value(wv);
  const Tensor& b = value(bv);
  if (x.ndim() != 4 || w.ndim() != 4 || b.ndim() != 1) {
    throw ShapeError("conv2d: bad ranks");
  }
  const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != Ci) throw ShapeError("conv2d: channel mismatch");
  if (b.dim(0) != Co) throw ShapeError("conv2d: bias size mismatch");
  const int Ho = (H + 2 * pad - kh) / stride + 1;
  const int Wo = (W + 2 * pad - kw) / stride + 1;
  if (Ho <= 0 || Wo <= 0) throw ShapeError("conv2d: output would be empty");

  Tensor out({N, Co, Ho, Wo});
  for (int n = 0; n < N; ++n) {
    for (int co = 0; co < Co; ++co) {
      double* obase = &out.v[((static_cast<size_t>(n) * Co + co) * Ho) * Wo];
      const double bias = b.v[static_cast<size_t>(co)];
      for (int i = 0; i < Ho * Wo; ++i) obase[i] = bias;
      for (int ci = 0; ci < Ci; ++ci) {
        const double* xbase = &x.v[((static_cast<size_t>(n) * Ci + ci) * H) * W];
        for (int dh = 0; dh < kh; ++dh) {
          auto [ho_lo, ho_hi] = valid_range(H, Ho, stride, dh - pad);
          for (int dw = 0; dw < kw; ++dw) {
            const double wval =
                w.v[((static_cast<size_t>(co) * Ci + ci) * kh + dh) * kw + dw];
            auto [wo_lo, wo_hi] = valid_range(W, Wo, stride, dw - pad);
            for (int ho = ho_lo; ho < ho_hi; ++ho) {
              const double* xrow = xbase + static_cast<size_t>(ho * stride + dh - pad) * W;
              double* orow = obase + static_cast<size_t>(ho) * Wo;
              for (int wo = wo_lo; wo < wo_hi; ++wo) {
                orow[wo] += wval * xrow[wo * stride + dw - pad];
              }
            }
          }
        }
      }
    }
  }

  auto fn = [stride, pad](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    const int xid = sn.parents[0], wid = sn.parents[1], bid = sn.parents[2];
    const Tensor& x = t.nodes_[static_cast<size_t>(xid)].value;
    const Tensor& w = t.nodes_[static_cast<size_t>(wid)].value;
    const Tensor& g = sn.grad;
    Tensor& dx = t.nodes_[static_cast<size_t>(xid)].grad;
    Tensor& dw = t.nodes_[static_cast<size_t>(wid)].grad;
    Tensor& db = t.nodes_[static_cast<size_t>(bid)].grad;
    const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int Co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const int Ho = g.dim(2), Wo = g.dim(3);
    for (int n = 0; n < N; ++n) {
      for (int co = 0; co < Co; ++co) {
        const double* gbase = &g.v[((static_cast<size_t>(n) * Co + co) * Ho) * Wo];
        double acc_b = 0.0;
        for (int i = 0; i < Ho * Wo; ++i) acc_b += gbase[i];
        db.v[static_cast<size_t>(co)] += acc_b;
        for (int ci = 0; ci < Ci; ++ci) {
          const double* xbase = &x.v[((static_cast<size_t>(n) * Ci + ci) * H) * W];
          double* dxbase = &dx.v[((static_cast<size_t>(n) * Ci + ci) * H) * W];
          for (int dh = 0; dh < kh; ++dh) {
            auto [ho_lo, ho_hi] = valid_range(H, Ho, stride, dh - pad);
            for (int dwk = 0; dwk < kw; ++dwk) {
              const size_t widx = ((static_cast<size_t>(co) * Ci + ci) * kh + dh) * kw + dwk;
              const double wval = w.v[widx];
              auto [wo_lo, wo_hi] = valid_range(W, Wo, stride, dwk - pad);
              double acc_w = 0.0;
              for (int ho = ho_lo; ho < ho_hi; ++ho) {
                const double* grow = gbase + static_cast<size_t>(ho) * Wo;
                const double* xrow = xbase + static_cast<size_t>(ho * stride + dh - pad) * W;
                double* dxrow = dxbase + static_cast<size_t>(ho * stride + dh - pad) * W;
                for (int wo = wo_lo; wo < wo_hi; ++wo) {
                  const double gv = grow[wo];
                  acc_w += gv * xrow[wo * stride + dwk - pad];
                  dxrow[wo * stride + dwk - pad] += gv * wval;
                }
              }
              dw.v[widx] += acc_w;
            }
          }
        }
      }
    }
  };
  return make(std::move(out), {xv.id, wv.id, bv.id}, fn);
}

Var Tape::relu(Var xv) {
  const Tensor& x = value(xv);
  Tensor out(x.shape);
  for (size_t i = 0; i < x.numel(); ++i) out.v[i] = x.v[i] > 0.0 ? x.v[i] : 0.0;
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    const Tensor& x = t.nodes_[static_cast<size_t>(sn.parents[0])].value;
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    for (size_t i = 0; i < x.numel(); ++i) {
      if (x.v[i] > 0.0) dx.v[i] += sn.grad.v[i];
    }
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::sigmoid(Var xv) {
  const Tensor& x = value(xv);
  Tensor out(x.shape);
  for (size_t i = 0; i < x.numel(); ++i) out.v[i] = 1.0 / (1.0 + std::exp(-x.v[i]));
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    for (size_t i = 0; i < sn.value.numel(); ++i) {
      const double y = sn.value.v[i];
      dx.v[i] += sn.grad.v[i] * y * (1.0 - y);
    }
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::batchnorm(Var xv, Var gv, Var bv, Tensor* running_mean, Tensor* running_var,
                    bool train_mode, double momentum, double eps) {
  const Tensor& x = value(xv);
  const Tensor& gamma = value(gv);
  const Tensor& beta = value(bv);
  if (x.ndim() != 4) throw ShapeError("batchnorm: expected NCHW input");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (gamma.dim(0) != C || beta.dim(0) != C) throw ShapeError("batchnorm: channel mismatch");
  if (running_mean->dim(0) != C || running_var->dim(0) != C) {
    throw ShapeError("batchnorm: running stat size mismatch");
  }
  const size_t plane = static_cast<size_t>(H) * W;
  const double m = static_cast<double>(N) * plane;

  Tensor mean({C}), var({C});
  if (train_mode) {
    for (int c = 0; c < C; ++c) {
      double s = 0.0;
      for (int n = 0; n < N; ++n) {
        const double* p = &x.v[(static_cast<size_t>(n) * C + c) * plane];
        for (size_t i = 0; i < plane; ++i) s += p[i];
      }
      const double mu = s / m;
      double sq = 0.0;
      for (int n = 0; n < N; ++n) {
        const double* p = &x.v[(static_cast<size_t>(n) * C + c) * plane];
        for (size_t i = 0; i < plane; ++i) sq += (p[i] - mu) * (p[i] - mu);
      }
      mean.v[c] = mu;
      var.v[c] = sq / m;
      const double unbiased = m > 1.0 ? sq / (m - 1.0) : var.v[c];
      running_mean->v[c] = (1.0 - momentum) * running_mean->v[c] + momentum * mu;
      running_var->v[c] = (1.0 - momentum) * running_var->v[c] + momentum * unbiased;
    }
  } else {
    mean = *running_mean;
    var = *running_var;
  }

  Tensor out(x.shape);
  Tensor xhat(x.shape);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const double inv = 1.0 / std::sqrt(var.v[c] + eps);
      const double mu = mean.v[c];
      const double ga = gamma.v[c], be = beta.v[c];
      const double* p = &x.v[(static_cast<size_t>(n) * C + c) * plane];
      double* h = &xhat.v[(static_cast<size_t>(n) * C + c) * plane];
      double* o = &out.v[(static_cast<size_t>(n) * C + c) * plane];
      for (size_t i = 0; i < plane; ++i) {
        h[i] = (p[i] - mu) * inv;
        o[i] = ga * h[i] + be;
      }
    }
  }

  auto fn = [mean, var, xhat, train_mode, eps, m, plane](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    const int xid = sn.parents[0], gid = sn.parents[1], bid = sn.parents[2];
    const Tensor& gamma = t.nodes_[static_cast<size_t>(gid)].value;
    Tensor& dx = t.nodes_[static_cast<size_t>(xid)].grad;
    Tensor& dgamma = t.nodes_[static_cast<size_t>(gid)].grad;
    Tensor& dbeta = t.nodes_[static_cast<size_t>(bid)].grad;
    const Tensor& g = sn.grad;
    const int N = sn.value.dim(0), C = sn.value.dim(1);
    for (int c = 0; c < C; ++c) {
      const double inv = 1.0 / std::sqrt(var.v[c] + eps);
      double sum_g = 0.0, sum_gx = 0.0;
      for (int n = 0; n < N; ++n) {
        const double* gp = &g.v[(static_cast<size_t>(n) * C + c) * plane];
        const double* hp = &xhat.v[(static_cast<size_t>(n) * C + c) * plane];
        for (size_t i = 0; i < plane; ++i) {
          sum_g += gp[i];
          sum_gx += gp[i] * hp[i];
        }
      }
      dgamma.v[c] += sum_gx;
      dbeta.v[c] += sum_g;
      const double ga = gamma.v[c];
      if (train_mode) {
        // Batch statistics participate in the forward pass, so the gradient
        // couples every element of the channel.
        for (int n = 0; n < N; ++n) {
          const double* gp = &g.v[(static_cast<size_t>(n) * C + c) * plane];
          const double* hp = &xhat.v[(static_cast<size_t>(n) * C + c) * plane];
          double* dxp = &dx.v[(static_cast<size_t>(n) * C + c) * plane];
          for (size_t i = 0; i < plane; ++i) {
            dxp[i] += ga * inv * (gp[i] - sum_g / m - hp[i] * sum_gx / m);
          }
        }
      } else {
        for (int n = 0; n < N; ++n) {
          const double* gp = &g.v[(static_cast<size_t>(n) * C + c) * plane];
          double* dxp = &dx.v[(static_cast<size_t>(n) * C + c) * plane];
          for (size_t i = 0; i < plane; ++i) dxp[i] += ga * inv * gp[i];
        }
      }
    }
  };
  return make(std::move(out), {xv.id, gv.id, bv.id}, fn);
}

Var Tape::spatial_mean(Var xv) {
  const Tensor& x = value(xv);
  if (x.ndim() != 4) throw ShapeError("spatial_mean: expected NCHW input");
  const int N = x.dim(0), C = x.dim(1);
  const size_t plane = static_cast<size_t>(x.dim(2)) * x.dim(3);
  Tensor out({N, C});
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const double* p = &x.v[(static_cast<size_t>(n) * C + c) * plane];
      double s = 0.0;
      for (size_t i = 0; i < plane; ++i) s += p[i];
      out.at2(n, c) = s / static_cast<double>(plane);
    }
  }
  auto fn = [plane](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    const int N = sn.value.dim(0), C = sn.value.dim(1);
    const double scale = 1.0 / static_cast<double>(plane);
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        const double gv = sn.grad.at2(n, c) * scale;
        double* dxp = &dx.v[(static_cast<size_t>(n) * C + c) * plane];
        for (size_t i = 0; i < plane; ++i) dxp[i] += gv;
      }
    }
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::slice_h(Var xv, int h0, int h1) {
  const Tensor& x = value(xv);
  if (x.ndim() != 4) throw ShapeError("slice_h: expected NCHW input");
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (h0 < 0 || h1 > H || h0 >= h1) throw ShapeError("slice_h: bad row range");
  Tensor out({N, C, h1 - h0, W});
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      for (int h = h0; h < h1; ++h) {
        const double* src = &x.v[((static_cast<size_t>(n) * C + c) * H + h) * W];
        double* dst = &out.v[((static_cast<size_t>(n) * C + c) * (h1 - h0) + (h - h0)) * W];
        std::copy(src, src + W, dst);
      }
    }
  }
  auto fn = [h0, h1, H](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    const int N = sn.value.dim(0), C = sn.value.dim(1), W = sn.value.dim(3);
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        for (int h = h0; h < h1; ++h) {
          const double* g = &sn.grad.v[((static_cast<size_t>(n) * C + c) * (h1 - h0) + (h - h0)) * W];
          double* d = &dx.v[((static_cast<size_t>(n) * C + c) * H + h) * W];
          for (int w = 0; w < W; ++w) d[w] += g[w];
        }
      }
    }
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::scale_channels(Var xv, Var sv) {
  const Tensor& x = value(xv);
  const Tensor& s = value(sv);
  if (x.ndim() != 4 || s.ndim() != 2) throw ShapeError("scale_channels: bad ranks");
  const int N = x.dim(0), C = x.dim(1);
  if (s.dim(0) != N || s.dim(1) != C) throw ShapeError("scale_channels: channel mismatch");
  const size_t plane = static_cast<size_t>(x.dim(2)) * x.dim(3);
  Tensor out(x.shape);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const double sc = s.at2(n, c);
      const double* p = &x.v[(static_cast<size_t>(n) * C + c) * plane];
      double* o = &out.v[(static_cast<size_t>(n) * C + c) * plane];
      for (size_t i = 0; i < plane; ++i) o[i] = p[i] * sc;
    }
  }
  auto fn = [plane](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    const Tensor& x = t.nodes_[static_cast<size_t>(sn.parents[0])].value;
    const Tensor& s = t.nodes_[static_cast<size_t>(sn.parents[1])].value;
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    Tensor& ds = t.nodes_[static_cast<size_t>(sn.parents[1])].grad;
    const int N = x.dim(0), C = x.dim(1);
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        const double sc = s.at2(n, c);
        const double* gp = &sn.grad.v[(static_cast<size_t>(n) * C + c) * plane];
        const double* xp = &x.v[(static_cast<size_t>(n) * C + c) * plane];
        double* dxp = &dx.v[(static_cast<size_t>(n) * C + c) * plane];
        double acc = 0.0;
        for (size_t i = 0; i < plane; ++i) {
          dxp[i] += gp[i] * sc;
          acc += gp[i] * xp[i];
        }
        ds.at2(n, c) += acc;
      }
    }
  };
  return make(std::move(out), {xv.id, sv.id}, fn);
}

Var Tape::stack_parts(const std::vector<Var>& parts) {
  if (parts.empty()) throw ConfigError("stack_parts: empty part list");
  const Tensor& first = value(parts[0]);
  if (first.ndim() != 2) throw ShapeError("stack_parts: expected NxC parts");
  const int N = first.dim(0), C = first.dim(1);
  const int K = static_cast<int>(parts.size());
  Tensor out({N, K, C});
  std::vector<int> ids;
  for (int i = 0; i < K; ++i) {
    const Tensor& p = value(parts[static_cast<size_t>(i)]);
    if (p.dim(0) != N || p.dim(1) != C) throw ShapeError("stack_parts: inconsistent part shapes");
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) out.at3(n, i, c) = p.at2(n, c);
    }
    ids.push_back(parts[static_cast<size_t>(i)].id);
  }
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    const int N = sn.value.dim(0), K = sn.value.dim(1), C = sn.value.dim(2);
    for (int i = 0; i < K; ++i) {
      Tensor& dp = t.nodes_[static_cast<size_t>(sn.parents[static_cast<size_t>(i)])].grad;
      for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) dp.at2(n, c) += sn.grad.at3(n, i, c);
      }
    }
  };
  return make(std::move(out), std::move(ids), fn);
}

Var Tape::mean_parts(Var xv) {
  const Tensor& x = value(xv);
  if (x.ndim() != 3) throw ShapeError("mean_parts: expected NxKxC input");
  const int N = x.dim(0), K = x.dim(1), C = x.dim(2);
  Tensor out({N, C});
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      double s = 0.0;
      for (int i = 0; i < K; ++i) s += x.at3(n, i, c);
      out.at2(n, c) = s / K;
    }
  }
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    const int N = dx.dim(0), K = dx.dim(1), C = dx.dim(2);
    for (int n = 0; n < N; ++n) {
      for (int c = 0; c < C; ++c) {
        const double gv = sn.grad.at2(n, c) / K;
        for (int i = 0; i < K; ++i) dx.at3(n, i, c) += gv;
      }
    }
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::linear(Var xv, Var wv, Var bv) {
  const Tensor& x = value(xv);
  const Tensor& w = value(wv);
  const Tensor& b = value(bv);
  if (x.ndim() != 2 || w.ndim() != 2 || b.ndim() != 1) throw ShapeError("linear: bad ranks");
  const int N = x.dim(0), C = x.dim(1), O = w.dim(0);
  if (w.dim(1) != C || b.dim(0) != O) throw ShapeError("linear: dimension mismatch");
  Tensor out({N, O});
  for (int n = 0; n < N; ++n) {
    for (int o = 0; o < O; ++o) {
      double s = b.v[static_cast<size_t>(o)];
      const double* xr = &x.v[static_cast<size_t>(n) * C];
      const double* wr = &w.v[static_cast<size_t>(o) * C];
      for (int c = 0; c < C; ++c) s += xr[c] * wr[c];
      out.at2(n, o) = s;
    }
  }
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    const Tensor& x = t.nodes_[static_cast<size_t>(sn.parents[0])].value;
    const Tensor& w = t.nodes_[static_cast<size_t>(sn.parents[1])].value;
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    Tensor& dw = t.nodes_[static_cast<size_t>(sn.parents[1])].grad;
    Tensor& db = t.nodes_[static_cast<size_t>(sn.parents[2])].grad;
    const int N = x.dim(0), C = x.dim(1), O = w.dim(0);
    for (int n = 0; n < N; ++n) {
      const double* xr = &x.v[static_cast<size_t>(n) * C];
      double* dxr = &dx.v[static_cast<size_t>(n) * C];
      for (int o = 0; o < O; ++o) {
        const double gv = sn.grad.at2(n, o);
        const double* wr = &w.v[static_cast<size_t>(o) * C];
        double* dwr = &dw.v[static_cast<size_t>(o) * C];
        for (int c = 0; c < C; ++c) {
          dxr[c] += gv * wr[c];
          dwr[c] += gv * xr[c];
        }
        db.v[static_cast<size_t>(o)] += gv;
      }
    }
  };
  return make(std::move(out), {xv.id, wv.id, bv.id}, fn);
}

Var Tape::detach(Var xv) {
  Tensor out = value(xv);
  return make(std::move(out), {xv.id}, nullptr, /*force_no_grad=*/true);
}

Var Tape::screen_scores(Var xv, double threshold) {
  const Tensor& x = value(xv);
  Tensor out(x.shape);
  for (size_t i = 0; i < x.numel(); ++i) out.v[i] = x.v[i] < threshold ? 0.0 : x.v[i];
  auto fn = [threshold](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    const Tensor& x = t.nodes_[static_cast<size_t>(sn.parents[0])].value;
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    for (size_t i = 0; i < x.numel(); ++i) {
      if (!(x.v[i] < threshold)) dx.v[i] += sn.grad.v[i];
    }
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::mean_all(Var xv) {
  const Tensor& x = value(xv);
  double s = 0.0;
  for (double e : x.v) s += e;
  Tensor out({1});
  out.v[0] = s / static_cast<double>(x.numel());
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    const double gv = sn.grad.v[0] / static_cast<double>(dx.numel());
    for (double& d : dx.v) d += gv;
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::sum_all(Var xv) {
  const Tensor& x = value(xv);
  double s = 0.0;
  for (double e : x.v) s += e;
  Tensor out({1});
  out.v[0] = s;
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    Tensor& dx = t.nodes_[static_cast<size_t>(sn.parents[0])].grad;
    const double gv = sn.grad.v[0];
    for (double& d : dx.v) d += gv;
  };
  return make(std::move(out), {xv.id}, fn);
}

Var Tape::add(Var av, Var bv) {
  const Tensor& a = value(av);
  const Tensor& b = value(bv);
  if (!a.same_shape(b)) throw ShapeError("add: shape mismatch");
  Tensor out(a.shape);
  for (size_t i = 0; i < a.numel(); ++i) out.v[i] = a.v[i] + b.v[i];
  auto fn = [](Tape& t, int self) {
    Tape::Node& sn = t.nodes_[static_cast<size_t>(self)];
    for (int pid : sn.parents) {
      Tensor& d = t.nodes_[static_cast<size_t>(pid)].grad;
      for (size_t i = 0; i < d.numel(); ++i) d.v[i] += sn.grad.v[i];
    }
  };
  return make(std::move(out), {av.id, bv.id}, fn);
}

Var Tape::add_in_order(const std::vector<Var>& scalars) {
  if (scalars.empty()) return constant_scalar(0.0);
  Var acc = scalars[0];
  for (size_t i = 1; i < scalars.size(); ++i) acc = add(acc, scalars[i]);
  return acc;
}

Var Tape::constant_scalar(double v) {
  Tensor t({1});
  t.v[0] = v;
  return leaf(std::move(t), false);
}

}  // namespace ocreid
