#pragma once

#include <cstdint>
#include <vector>

#include "mixsei/tensor.hpp"

namespace mixsei::nn {

// Raw dense kernels over [B, C, L] row-major arrays, templated on the
// compute type: double for tests and evaluation, float for fast training.
// All gradient outputs (dx, dw, db, ...) are accumulated (+=) so callers
// control zeroing; forward outputs are overwritten. Every loop runs in a
// fixed order, so results are bit-reproducible for a given type. Input and
// output arrays of one call must not overlap.

template <class T>
void conv1d_forward(const T* x, int b, int cin, int l, const T* w, int cout,
                    int k, const T* bias, int stride, int pad, T* y, int lout);

template <class T>
void conv1d_backward(const T* x, int b, int cin, int l, const T* w, int cout,
                     int k, int stride, int pad, const T* dy, int lout, T* dx,
                     T* dw, T* db);

template <class T>
void relu_forward(const T* x, std::size_t n, T* y);

// Gradient gated by the forward output: dx += dy * (y > 0).
template <class T>
void relu_backward(const T* y, const T* dy, std::size_t n, T* dx);

// Non-overlapping window-2 max; l must be even. argmax records the winning
// offset (0 or 1) per output element; ties go to the first index.
template <class T>
void maxpool2_forward(const T* x, int b, int c, int l, T* y, std::uint8_t* argmax);

template <class T>
void maxpool2_backward(const T* dy, int b, int c, int lout,
                       const std::uint8_t* argmax, T* dx);

template <class T>
void gap_forward(const T* x, int b, int c, int l, T* y);

template <class T>
void gap_backward(const T* dy, int b, int c, int l, T* dx);

template <class T>
void dense_forward(const T* x, int b, int din, const T* w, int dout,
                   const T* bias, T* y);

template <class T>
void dense_backward(const T* x, int b, int din, const T* w, int dout,
                    const T* dy, T* dx, T* dw, T* db);

// Mean over batch of -(1/K) sum_m [l log p + (1-l) log(1-p)] with
// p = sigmoid(z), computed in the stable logit form. dlogits is
// overwritten with d loss / d z. labels must be 0 or 1.
template <class T>
T bce_with_logits(const T* logits, const T* labels, int b, int k, T* dlogits);

// Mean over batch of -log softmax(z)[class]. dlogits overwritten.
template <class T>
T softmax_cross_entropy(const T* logits, const int* classes, int b, int c,
                        T* dlogits);

template <class T>
void sigmoid(const T* x, std::size_t n, T* y);

// ---------------------------------------------------------------------------
// Tensor-level wrappers (double precision), with shape validation. These
// carry the per-operation contracts; the layer stack calls the raw kernels.

struct Conv1dGrads {
  Tensor dx, dw, db;
};

// x: [B, Cin, L], w: [Cout, Cin, k], bias: [Cout] -> [B, Cout, Lout].
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias,
              int stride = 1, int pad = 0);
Conv1dGrads conv1d_grad(const Tensor& x, const Tensor& w, const Tensor& dy,
                        int stride = 1, int pad = 0);

Tensor relu(const Tensor& x);
Tensor relu_grad(const Tensor& x, const Tensor& dy);

struct MaxPoolResult {
  Tensor y;
  std::vector<std::uint8_t> argmax;
};

// x: [B, C, L] with even L -> [B, C, L/2].
MaxPoolResult maxpool1d(const Tensor& x);
Tensor maxpool1d_grad(const MaxPoolResult& fwd, const Tensor& dy);

// x: [B, C, L] -> [B, C].
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_grad(const Tensor& dy, int l);

// x: [B, din], w: [dout, din], bias: [dout] -> [B, dout].
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& bias);

struct DenseGrads {
  Tensor dx, dw, db;
};
DenseGrads dense_grad(const Tensor& x, const Tensor& w, const Tensor& dy);

struct LossResult {
  double loss = 0.0;
  Tensor dlogits;
};

// logits, labels: [B, K]; labels must be exactly 0 or 1.
LossResult bce_loss(const Tensor& logits, const Tensor& labels);
// logits: [B, C]; classes in [0, C).
LossResult softmax_ce_loss(const Tensor& logits, const std::vector<int>& classes);

}  // namespace mixsei::nn
