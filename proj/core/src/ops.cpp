#include "mixsei/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixsei::nn {

namespace {

// Dot product with a fixed, data-independent summation order: sixteen
// accumulator lanes (lane u sums elements u, u+16, ...) folded by a fixed
// pairwise tree, then the remainder in index order. The association depends
// only on n — never on threading or alignment — so results are reproducible
// run to run, while the independent lanes keep the loop in SIMD registers.
template <class T>
inline T dot_lanes(const T* a, const T* b, int n) {
  constexpr int kLanes = 16;
  T acc[kLanes] = {};
  int i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (int u = 0; u < kLanes; ++u) acc[u] += a[i + u] * b[i + u];
  }
  for (int w = kLanes / 2; w > 0; w /= 2) {
    for (int u = 0; u < w; ++u) acc[u] += acc[u + w];
  }
  T s = acc[0];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <class T>
inline void axpy(T alpha, const T* x, T* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Fused backward row update: returns dot(dy, x) with the same fixed lane
// association as dot_lanes while accumulating dx += wv * dy in the same
// traversal, so each dy element is loaded once for both uses. Requires the
// three rows to be disjoint (they come from separate buffers).
template <class T>
inline T dot_axpy_lanes(const T* __restrict dy, const T* __restrict x, T wv,
                        T* __restrict dx, int n) {
  constexpr int kLanes = 16;
  T acc[kLanes] = {};
  int i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (int u = 0; u < kLanes; ++u) {
      const T d = dy[i + u];
      acc[u] += d * x[i + u];
      dx[i + u] += wv * d;
    }
  }
  for (int w = kLanes / 2; w > 0; w /= 2) {
    for (int u = 0; u < w; ++u) acc[u] += acc[u + w];
  }
  T s = acc[0];
  for (; i < n; ++i) {
    const T d = dy[i];
    s += d * x[i];
    dx[i] += wv * d;
  }
  return s;
}

inline int conv_out_len(int l, int k, int stride, int pad) {
  return (l + 2 * pad - k) / stride + 1;
}

}  // namespace

template <class T>
void conv1d_forward(const T* x, int b, int cin, int l, const T* w, int cout,
                    int k, const T* bias, int stride, int pad, T* y, int lout) {
  for (int ib = 0; ib < b; ++ib) {
    const T* xb = x + static_cast<std::size_t>(ib) * cin * l;
    T* yb = y + static_cast<std::size_t>(ib) * cout * lout;
    for (int co = 0; co < cout; ++co) {
      T* yr = yb + static_cast<std::size_t>(co) * lout;
      const T bv = bias ? bias[co] : T(0);
      for (int t = 0; t < lout; ++t) yr[t] = bv;
      const T* wc = w + static_cast<std::size_t>(co) * cin * k;
      for (int ci = 0; ci < cin; ++ci) {
        const T* xr = xb + static_cast<std::size_t>(ci) * l;
        const T* wr = wc + static_cast<std::size_t>(ci) * k;
        if (stride == 1) {
          for (int j = 0; j < k; ++j) {
            const T wv = wr[j];
            if (wv == T(0)) continue;
            const int off = j - pad;
            const int t0 = std::max(0, -off);
            const int t1 = std::min(lout, l - off);
            axpy(wv, xr + t0 + off, yr + t0, t1 - t0);
          }
        } else {
          for (int t = 0; t < lout; ++t) {
            const int base = t * stride - pad;
            T acc = 0;
            for (int j = 0; j < k; ++j) {
              const int xi = base + j;
              if (xi >= 0 && xi < l) acc += wr[j] * xr[xi];
            }
            yr[t] += acc;
          }
        }
      }
    }
  }
}

template <class T>
void conv1d_backward(const T* x, int b, int cin, int l, const T* w, int cout,
                     int k, int stride, int pad, const T* dy, int lout, T* dx,
                     T* dw, T* db) {
  for (int ib = 0; ib < b; ++ib) {
    const T* xb = x + static_cast<std::size_t>(ib) * cin * l;
    T* dxb = dx ? dx + static_cast<std::size_t>(ib) * cin * l : nullptr;
    const T* dyb = dy + static_cast<std::size_t>(ib) * cout * lout;
    for (int co = 0; co < cout; ++co) {
      const T* dyr = dyb + static_cast<std::size_t>(co) * lout;
      if (db) {
        T acc = 0;
        for (int t = 0; t < lout; ++t) acc += dyr[t];
        db[co] += acc;
      }
      const T* wc = w + static_cast<std::size_t>(co) * cin * k;
      T* dwc = dw ? dw + static_cast<std::size_t>(co) * cin * k : nullptr;
      for (int ci = 0; ci < cin; ++ci) {
        const T* xr = xb + static_cast<std::size_t>(ci) * l;
        const T* wr = wc + static_cast<std::size_t>(ci) * k;
        T* dxr = dxb ? dxb + static_cast<std::size_t>(ci) * l : nullptr;
        T* dwr = dwc ? dwc + static_cast<std::size_t>(ci) * k : nullptr;
        if (stride == 1) {
          for (int j = 0; j < k; ++j) {
            const int off = j - pad;
            const int t0 = std::max(0, -off);
            const int t1 = std::min(lout, l - off);
            if (t1 <= t0) continue;
            if (dwr && dxr) {
              dwr[j] += dot_axpy_lanes(dyr + t0, xr + t0 + off, wr[j],
                                       dxr + t0 + off, t1 - t0);
            } else if (dwr) {
              dwr[j] += dot_lanes(dyr + t0, xr + t0 + off, t1 - t0);
            } else if (dxr) {
              axpy(wr[j], dyr + t0, dxr + t0 + off, t1 - t0);
            }
          }
        } else {
          for (int t = 0; t < lout; ++t) {
            const int base = t * stride - pad;
            const T g = dyr[t];
            for (int j = 0; j < k; ++j) {
              const int xi = base + j;
              if (xi < 0 || xi >= l) continue;
              if (dwr) dwr[j] += g * xr[xi];
              if (dxr) dxr[xi] += wr[j] * g;
            }
          }
        }
      }
    }
  }
}

template <class T>
void relu_forward(const T* x, std::size_t n, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <class T>
void relu_backward(const T* y, const T* dy, std::size_t n, T* dx) {
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] > T(0)) dx[i] += dy[i];
  }
}

template <class T>
void maxpool2_forward(const T* x, int b, int c, int l, T* y, std::uint8_t* argmax) {
  const int lout = l / 2;
  const std::size_t rows = static_cast<std::size_t>(b) * c;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * l;
    T* yr = y + r * lout;
    std::uint8_t* ar = argmax + r * lout;
    for (int t = 0; t < lout; ++t) {
      const T a = xr[2 * t];
      const T bvl = xr[2 * t + 1];
      const std::uint8_t sel = bvl > a ? 1 : 0;
      yr[t] = sel ? bvl : a;
      ar[t] = sel;
    }
  }
}

template <class T>
void maxpool2_backward(const T* dy, int b, int c, int lout,
                       const std::uint8_t* argmax, T* dx) {
  const std::size_t rows = static_cast<std::size_t>(b) * c;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* dyr = dy + r * lout;
    const std::uint8_t* ar = argmax + r * lout;
    T* dxr = dx + r * (2 * static_cast<std::size_t>(lout));
    for (int t = 0; t < lout; ++t) dxr[2 * t + ar[t]] += dyr[t];
  }
}

template <class T>
void gap_forward(const T* x, int b, int c, int l, T* y) {
  const T inv = T(1) / static_cast<T>(l);
  const std::size_t rows = static_cast<std::size_t>(b) * c;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * l;
    T s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    int i = 0;
    for (; i + 4 <= l; i += 4) {
      s0 += xr[i];
      s1 += xr[i + 1];
      s2 += xr[i + 2];
      s3 += xr[i + 3];
    }
    T s = (s0 + s1) + (s2 + s3);
    for (; i < l; ++i) s += xr[i];
    y[r] = s * inv;
  }
}

template <class T>
void gap_backward(const T* dy, int b, int c, int l, T* dx) {
  const T inv = T(1) / static_cast<T>(l);
  const std::size_t rows = static_cast<std::size_t>(b) * c;
  for (std::size_t r = 0; r < rows; ++r) {
    const T g = dy[r] * inv;
    T* dxr = dx + r * l;
    for (int i = 0; i < l; ++i) dxr[i] += g;
  }
}

template <class T>
void dense_forward(const T* x, int b, int din, const T* w, int dout,
                   const T* bias, T* y) {
  for (int ib = 0; ib < b; ++ib) {
    const T* xr = x + static_cast<std::size_t>(ib) * din;
    T* yr = y + static_cast<std::size_t>(ib) * dout;
    for (int o = 0; o < dout; ++o) {
      yr[o] = (bias ? bias[o] : T(0)) +
              dot_lanes(xr, w + static_cast<std::size_t>(o) * din, din);
    }
  }
}

template <class T>
void dense_backward(const T* x, int b, int din, const T* w, int dout,
                    const T* dy, T* dx, T* dw, T* db) {
  for (int ib = 0; ib < b; ++ib) {
    const T* xr = x + static_cast<std::size_t>(ib) * din;
    const T* dyr = dy + static_cast<std::size_t>(ib) * dout;
    T* dxr = dx ? dx + static_cast<std::size_t>(ib) * din : nullptr;
    for (int o = 0; o < dout; ++o) {
      const T g = dyr[o];
      if (db) db[o] += g;
      if (g == T(0)) continue;
      const T* wr = w + static_cast<std::size_t>(o) * din;
      if (dw) axpy(g, xr, dw + static_cast<std::size_t>(o) * din, din);
      if (dxr) axpy(g, wr, dxr, din);
    }
  }
}

template <class T>
T bce_with_logits(const T* logits, const T* labels, int b, int k, T* dlogits) {
  const std::size_t n = static_cast<std::size_t>(b) * k;
  const T scale = T(1) / (static_cast<T>(b) * static_cast<T>(k));
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T z = logits[i];
    const T lab = labels[i];
    const T az = z >= T(0) ? z : -z;
    total += (z > T(0) ? z : T(0)) - z * lab + std::log1p(std::exp(-az));
    const T sig = T(1) / (T(1) + std::exp(-z));
    dlogits[i] = (sig - lab) * scale;
  }
  return total * scale;
}

template <class T>
T softmax_cross_entropy(const T* logits, const int* classes, int b, int c,
                        T* dlogits) {
  const T scale = T(1) / static_cast<T>(b);
  T total = 0;
  for (int ib = 0; ib < b; ++ib) {
    const T* zr = logits + static_cast<std::size_t>(ib) * c;
    T* dr = dlogits + static_cast<std::size_t>(ib) * c;
    T m = zr[0];
    for (int j = 1; j < c; ++j) m = std::max(m, zr[j]);
    T denom = 0;
    for (int j = 0; j < c; ++j) {
      dr[j] = std::exp(zr[j] - m);
      denom += dr[j];
    }
    const T inv = T(1) / denom;
    const int tgt = classes[ib];
    total += std::log(denom) + m - zr[tgt];
    for (int j = 0; j < c; ++j) {
      dr[j] = (dr[j] * inv - (j == tgt ? T(1) : T(0))) * scale;
    }
  }
  return total * scale;
}

template <class T>
void sigmoid(const T* x, std::size_t n, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

#define MIXSEI_INSTANTIATE_OPS(T)                                              \
  template void conv1d_forward<T>(const T*, int, int, int, const T*, int, int, \
                                  const T*, int, int, T*, int);                \
  template void conv1d_backward<T>(const T*, int, int, int, const T*, int,     \
                                   int, int, int, const T*, int, T*, T*, T*);  \
  template void relu_forward<T>(const T*, std::size_t, T*);                    \
  template void relu_backward<T>(const T*, const T*, std::size_t, T*);         \
  template void maxpool2_forward<T>(const T*, int, int, int, T*,               \
                                    std::uint8_t*);                            \
  template void maxpool2_backward<T>(const T*, int, int, int,                  \
                                     const std::uint8_t*, T*);                 \
  template void gap_forward<T>(const T*, int, int, int, T*);                   \
  template void gap_backward<T>(const T*, int, int, int, T*);                  \
  template void dense_forward<T>(const T*, int, int, const T*, int, const T*,  \
                                 T*);                                          \
  template void dense_backward<T>(const T*, int, int, const T*, int, const T*, \
                                  T*, T*, T*);                                 \
  template T bce_with_logits<T>(const T*, const T*, int, int, T*);             \
  template T softmax_cross_entropy<T>(const T*, const int*, int, int, T*);     \
  template void sigmoid<T>(const T*, std::size_t, T*);

MIXSEI_INSTANTIATE_OPS(float)
MIXSEI_INSTANTIATE_OPS(double)
#undef MIXSEI_INSTANTIATE_OPS

// ---------------------------------------------------------------------------
// Tensor-level wrappers.

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_conv_shapes(const Tensor& x, const Tensor& w, int stride, int pad) {
  require(x.rank() == 3, "conv1d: input must be [batch, channels, length]");
  require(w.rank() == 3, "conv1d: weight must be [out, in, kernel]");
  require(w.dim(1) == x.dim(1), "conv1d: weight input channels must match input");
  require(stride >= 1, "conv1d: stride must be >= 1");
  require(pad >= 0, "conv1d: padding must be >= 0");
  require(w.dim(2) <= x.dim(2) + 2 * pad,
          "conv1d: kernel longer than padded input");
}

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
              int pad) {
  check_conv_shapes(x, w, stride, pad);
  require(bias.rank() == 1 && bias.dim(0) == w.dim(0),
          "conv1d: bias must be [out_channels]");
  const int lout = conv_out_len(x.dim(2), w.dim(2), stride, pad);
  Tensor y = Tensor::zeros({x.dim(0), w.dim(0), lout});
  conv1d_forward(x.data(), x.dim(0), x.dim(1), x.dim(2), w.data(), w.dim(0),
                 w.dim(2), bias.data(), stride, pad, y.data(), lout);
  return y;
}

Conv1dGrads conv1d_grad(const Tensor& x, const Tensor& w, const Tensor& dy,
                        int stride, int pad) {
  check_conv_shapes(x, w, stride, pad);
  const int lout = conv_out_len(x.dim(2), w.dim(2), stride, pad);
  require(dy.rank() == 3 && dy.dim(0) == x.dim(0) && dy.dim(1) == w.dim(0) &&
              dy.dim(2) == lout,
          "conv1d: upstream gradient shape mismatch");
  Conv1dGrads g;
  g.dx = Tensor::zeros(x.shape);
  g.dw = Tensor::zeros(w.shape);
  g.db = Tensor::zeros({w.dim(0)});
  conv1d_backward(x.data(), x.dim(0), x.dim(1), x.dim(2), w.data(), w.dim(0),
                  w.dim(2), stride, pad, dy.data(), lout, g.dx.data(),
                  g.dw.data(), g.db.data());
  return g;
}

Tensor relu(const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape);
  relu_forward(x.data(), x.size(), y.data());
  return y;
}

Tensor relu_grad(const Tensor& x, const Tensor& dy) {
  require(x.shape == dy.shape, "relu: gradient shape mismatch");
  Tensor y = relu(x);
  Tensor dx = Tensor::zeros(x.shape);
  relu_backward(y.data(), dy.data(), x.size(), dx.data());
  return dx;
}

MaxPoolResult maxpool1d(const Tensor& x) {
  require(x.rank() == 3, "maxpool1d: input must be [batch, channels, length]");
  require(x.dim(2) % 2 == 0, "maxpool1d: length must be even");
  MaxPoolResult r;
  const int lout = x.dim(2) / 2;
  r.y = Tensor::zeros({x.dim(0), x.dim(1), lout});
  r.argmax.assign(r.y.size(), 0);
  maxpool2_forward(x.data(), x.dim(0), x.dim(1), x.dim(2), r.y.data(),
                   r.argmax.data());
  return r;
}

Tensor maxpool1d_grad(const MaxPoolResult& fwd, const Tensor& dy) {
  require(dy.shape == fwd.y.shape, "maxpool1d: gradient shape mismatch");
  const int lout = fwd.y.dim(2);
  Tensor dx = Tensor::zeros({fwd.y.dim(0), fwd.y.dim(1), 2 * lout});
  maxpool2_backward(dy.data(), fwd.y.dim(0), fwd.y.dim(1), lout,
                    fwd.argmax.data(), dx.data());
  return dx;
}

Tensor global_avg_pool(const Tensor& x) {
  require(x.rank() == 3, "global_avg_pool: input must be [batch, channels, length]");
  Tensor y = Tensor::zeros({x.dim(0), x.dim(1)});
  gap_forward(x.data(), x.dim(0), x.dim(1), x.dim(2), y.data());
  return y;
}

Tensor global_avg_pool_grad(const Tensor& dy, int l) {
  require(dy.rank() == 2, "global_avg_pool: gradient must be [batch, channels]");
  require(l >= 1, "global_avg_pool: length must be >= 1");
  Tensor dx = Tensor::zeros({dy.dim(0), dy.dim(1), l});
  gap_backward(dy.data(), dy.dim(0), dy.dim(1), l, dx.data());
  return dx;
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require(x.rank() == 2, "dense: input must be [batch, features]");
  require(w.rank() == 2 && w.dim(1) == x.dim(1),
          "dense: weight must be [out, in] with in matching input");
  require(bias.rank() == 1 && bias.dim(0) == w.dim(0),
          "dense: bias must be [out]");
  Tensor y = Tensor::zeros({x.dim(0), w.dim(0)});
  dense_forward(x.data(), x.dim(0), x.dim(1), w.data(), w.dim(0), bias.data(),
                y.data());
  return y;
}

DenseGrads dense_grad(const Tensor& x, const Tensor& w, const Tensor& dy) {
  require(x.rank() == 2 && w.rank() == 2 && dy.rank() == 2,
          "dense: gradients need 2-d tensors");
  require(dy.dim(0) == x.dim(0) && dy.dim(1) == w.dim(0) && w.dim(1) == x.dim(1),
          "dense: gradient shape mismatch");
  DenseGrads g;
  g.dx = Tensor::zeros(x.shape);
  g.dw = Tensor::zeros(w.shape);
  g.db = Tensor::zeros({w.dim(0)});
  dense_backward(x.data(), x.dim(0), x.dim(1), w.data(), w.dim(0), dy.data(),
                 g.dx.data(), g.dw.data(), g.db.data());
  return g;
}

LossResult bce_loss(const Tensor& logits, const Tensor& labels) {
  require(logits.rank() == 2, "bce: logits must be [batch, labels]");
  require(labels.shape == logits.shape, "bce: labels shape mismatch");
  for (double v : labels.values) {
    require(v == 0.0 || v == 1.0, "bce: labels must be exactly 0 or 1");
  }
  LossResult r;
  r.dlogits = Tensor::zeros(logits.shape);
  r.loss = bce_with_logits(logits.data(), labels.data(), logits.dim(0),
                           logits.dim(1), r.dlogits.data());
  return r;
}

LossResult softmax_ce_loss(const Tensor& logits, const std::vector<int>& classes) {
  require(logits.rank() == 2, "softmax_ce: logits must be [batch, classes]");
  require(static_cast<int>(classes.size()) == logits.dim(0),
          "softmax_ce: one target class per row required");
  for (int cls : classes) {
    require(cls >= 0 && cls < logits.dim(1), "softmax_ce: class index out of range");
  }
  LossResult r;
  r.dlogits = Tensor::zeros(logits.shape);
  r.loss = softmax_cross_entropy(logits.data(), classes.data(), logits.dim(0),
                                 logits.dim(1), r.dlogits.data());
  return r;
}

}  // namespace mixsei::nn
