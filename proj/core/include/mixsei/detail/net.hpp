#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mixsei/ops.hpp"

namespace mixsei::nn::detail {

struct ConvShape {
  int cin = 0;
  int cout = 0;
  int k = 1;
  int pad = 0;
};

struct StagePlan {
  ConvShape conv1;
  ConvShape conv2;
  ConvShape proj;
  bool has_proj = false;
};

// Fully resolved layer plan: channel counts already scaled, head width fixed.
struct NetPlan {
  int input_len = 0;
  int in_channels = 2;
  ConvShape stem;
  std::vector<StagePlan> stages;
  int feat_dim = 0;
  int head_out = 0;
};

struct ParamSlice {
  std::size_t offset = 0;
  std::size_t count = 0;
};

struct StageSlices {
  ParamSlice w1, b1, w2, b2, wp, bp;
};

// Canonical flat parameter layout: stem, then per stage conv1/conv2/proj,
// then head; weights before biases within each layer. Checkpoints and the
// initializer follow this exact order.
struct NetLayout {
  ParamSlice stem_w, stem_b;
  std::vector<StageSlices> stages;
  ParamSlice head_w, head_b;
  std::size_t total = 0;
};

inline NetLayout make_layout(const NetPlan& plan) {
  NetLayout lay;
  std::size_t off = 0;
  auto take = [&off](std::size_t n) {
    ParamSlice s{off, n};
    off += n;
    return s;
  };
  auto conv_w = [](const ConvShape& c) {
    return static_cast<std::size_t>(c.cout) * c.cin * c.k;
  };
  lay.stem_w = take(conv_w(plan.stem));
  lay.stem_b = take(static_cast<std::size_t>(plan.stem.cout));
  for (const StagePlan& sp : plan.stages) {
    StageSlices s;
    s.w1 = take(conv_w(sp.conv1));
    s.b1 = take(static_cast<std::size_t>(sp.conv1.cout));
    s.w2 = take(conv_w(sp.conv2));
    s.b2 = take(static_cast<std::size_t>(sp.conv2.cout));
    if (sp.has_proj) {
      s.wp = take(conv_w(sp.proj));
      s.bp = take(static_cast<std::size_t>(sp.proj.cout));
    }
    lay.stages.push_back(s);
  }
  lay.head_w = take(static_cast<std::size_t>(plan.head_out) * plan.feat_dim);
  lay.head_b = take(static_cast<std::size_t>(plan.head_out));
  lay.total = off;
  return lay;
}

// Residual 1-D network with explicit forward/backward over flat parameter
// and gradient arrays. Templated on the compute type so the same code runs
// exact double-precision checks and the fast float training path.
template <class T>
class Net {
 public:
  explicit Net(const NetPlan& plan)
      : plan_(plan), layout_(make_layout(plan)) {
    params_.assign(layout_.total, T(0));
    grads_.assign(layout_.total, T(0));
  }

  const NetPlan& plan() const { return plan_; }
  const NetLayout& layout() const { return layout_; }
  std::size_t param_count() const { return layout_.total; }

  std::vector<T>& params() { return params_; }
  std::vector<T>& grads() { return grads_; }

  void load_params(const std::vector<double>& src) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      params_[i] = static_cast<T>(src[i]);
    }
  }

  void store_grads(std::vector<double>& dst) const {
    dst.resize(grads_.size());
    for (std::size_t i = 0; i < grads_.size(); ++i) {
      dst[i] = static_cast<double>(grads_[i]);
    }
  }

  void zero_grads() { std::fill(grads_.begin(), grads_.end(), T(0)); }

  // x: [batch, 2, input_len] float32 windows; returns logits [batch, head_out].
  const T* forward(const float* x, int batch) {
    ensure_batch(batch);
    batch_ = batch;
    const int l0 = plan_.input_len;
    const std::size_t nin =
        static_cast<std::size_t>(batch) * plan_.in_channels * l0;
    for (std::size_t i = 0; i < nin; ++i) x_in_[i] = static_cast<T>(x[i]);

    conv1d_forward(x_in_.data(), batch, plan_.in_channels, l0, P(layout_.stem_w),
                   plan_.stem.cout, plan_.stem.k, P(layout_.stem_b), 1,
                   plan_.stem.pad, stem_y_.data(), l0);
    relu_forward(stem_y_.data(),
                 static_cast<std::size_t>(batch) * plan_.stem.cout * l0,
                 stem_y_.data());

    const T* cur = stem_y_.data();
    int cur_c = plan_.stem.cout;
    int cur_l = l0;
    for (std::size_t s = 0; s < plan_.stages.size(); ++s) {
      const StagePlan& sp = plan_.stages[s];
      const StageSlices& sl = layout_.stages[s];
      const int cout = sp.conv1.cout;
      const std::size_t n = static_cast<std::size_t>(batch) * cout * cur_l;
      conv1d_forward(cur, batch, cur_c, cur_l, P(sl.w1), cout, sp.conv1.k,
                     P(sl.b1), 1, sp.conv1.pad, a_[s].data(), cur_l);
      relu_forward(a_[s].data(), n, a_[s].data());
      conv1d_forward(a_[s].data(), batch, cout, cur_l, P(sl.w2), cout,
                     sp.conv2.k, P(sl.b2), 1, sp.conv2.pad, out_[s].data(),
                     cur_l);
      if (sp.has_proj) {
        conv1d_forward(cur, batch, cur_c, cur_l, P(sl.wp), cout, 1, P(sl.bp), 1,
                       0, skip_[s].data(), cur_l);
        add_into(out_[s].data(), skip_[s].data(), n);
      } else {
        add_into(out_[s].data(), cur, n);
      }
      relu_forward(out_[s].data(), n, out_[s].data());
      maxpool2_forward(out_[s].data(), batch, cout, cur_l, pooled_[s].data(),
                       argmax_[s].data());
      cur = pooled_[s].data();
      cur_c = cout;
      cur_l /= 2;
    }

    gap_forward(cur, batch, cur_c, cur_l, feat_.data());
    dense_forward(feat_.data(), batch, plan_.feat_dim, P(layout_.head_w),
                  plan_.head_out, P(layout_.head_b), logits_.data());
    return logits_.data();
  }

  const T* logits() const { return logits_.data(); }

  // Accumulates parameter gradients for the batch last passed to forward.
  void backward(const T* dlogits) {
    const int batch = batch_;
    const int nstage = static_cast<int>(plan_.stages.size());
    std::fill(dfeat_.begin(), dfeat_.end(), T(0));
    dense_backward(feat_.data(), batch, plan_.feat_dim, P(layout_.head_w),
                   plan_.head_out, dlogits, dfeat_.data(), G(layout_.head_w),
                   G(layout_.head_b));

    const int last_l = plan_.input_len >> nstage;
    const int feat_c = plan_.feat_dim;
    std::fill(gpool_.begin(), gpool_.end(), T(0));
    gap_backward(dfeat_.data(), batch, feat_c, last_l, gpool_.data());

    T* gout = gpool_.data();
    for (int s = nstage - 1; s >= 0; --s) {
      const StagePlan& sp = plan_.stages[static_cast<std::size_t>(s)];
      const StageSlices& sl = layout_.stages[static_cast<std::size_t>(s)];
      const int cur_l = plan_.input_len >> s;
      const int cout = sp.conv1.cout;
      const int cin = sp.conv1.cin;
      const std::size_t n = static_cast<std::size_t>(batch) * cout * cur_l;
      const T* input =
          s == 0 ? stem_y_.data() : pooled_[static_cast<std::size_t>(s - 1)].data();

      auto& dsum = dsum_[static_cast<std::size_t>(s)];
      std::fill(dsum.begin(), dsum.end(), T(0));
      maxpool2_backward(gout, batch, cout, cur_l / 2,
                        argmax_[static_cast<std::size_t>(s)].data(), dsum.data());
      gate_by(out_[static_cast<std::size_t>(s)].data(), dsum.data(), n);

      auto& da = da_[static_cast<std::size_t>(s)];
      std::fill(da.begin(), da.end(), T(0));
      conv1d_backward(a_[static_cast<std::size_t>(s)].data(), batch, cout, cur_l,
                      P(sl.w2), cout, sp.conv2.k, 1, sp.conv2.pad, dsum.data(),
                      cur_l, da.data(), G(sl.w2), G(sl.b2));
      gate_by(a_[static_cast<std::size_t>(s)].data(), da.data(), n);

      auto& gin = gin_[static_cast<std::size_t>(s)];
      std::fill(gin.begin(), gin.end(), T(0));
      conv1d_backward(input, batch, cin, cur_l, P(sl.w1), cout, sp.conv1.k, 1,
                      sp.conv1.pad, da.data(), cur_l, gin.data(), G(sl.w1),
                      G(sl.b1));
      if (sp.has_proj) {
        conv1d_backward(input, batch, cin, cur_l, P(sl.wp), cout, 1, 1, 0,
                        dsum.data(), cur_l, gin.data(), G(sl.wp), G(sl.bp));
      } else {
        add_into(gin.data(), dsum.data(), n);
      }
      gout = gin.data();
    }

    const std::size_t nstem =
        static_cast<std::size_t>(batch) * plan_.stem.cout * plan_.input_len;
    gate_by(stem_y_.data(), gout, nstem);
    conv1d_backward(x_in_.data(), batch, plan_.in_channels, plan_.input_len,
                    P(layout_.stem_w), plan_.stem.cout, plan_.stem.k, 1,
                    plan_.stem.pad, gout, plan_.input_len,
                    static_cast<T*>(nullptr), G(layout_.stem_w),
                    G(layout_.stem_b));
  }

 private:
  T* P(const ParamSlice& s) { return params_.data() + s.offset; }
  T* G(const ParamSlice& s) { return grads_.data() + s.offset; }

  static void add_into(T* dst, const T* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
  }

  // ReLU gradient gate: zero g wherever the forward output was clamped.
  static void gate_by(const T* y, T* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(y[i] > T(0))) g[i] = T(0);
    }
  }

  void ensure_batch(int batch) {
    if (batch <= capacity_) return;
    const std::size_t b = static_cast<std::size_t>(batch);
    const int l0 = plan_.input_len;
    const int nstage = static_cast<int>(plan_.stages.size());
    x_in_.assign(b * plan_.in_channels * l0, T(0));
    stem_y_.assign(b * plan_.stem.cout * l0, T(0));
    a_.resize(static_cast<std::size_t>(nstage));
    out_.resize(static_cast<std::size_t>(nstage));
    skip_.resize(static_cast<std::size_t>(nstage));
    pooled_.resize(static_cast<std::size_t>(nstage));
    argmax_.resize(static_cast<std::size_t>(nstage));
    dsum_.resize(static_cast<std::size_t>(nstage));
    da_.resize(static_cast<std::size_t>(nstage));
    gin_.resize(static_cast<std::size_t>(nstage));
    for (int s = 0; s < nstage; ++s) {
      const StagePlan& sp = plan_.stages[static_cast<std::size_t>(s)];
      const int cur_l = l0 >> s;
      const int cout = sp.conv1.cout;
      const int cin = sp.conv1.cin;
      const std::size_t ns = b * cout * cur_l;
      auto idx = static_cast<std::size_t>(s);
      a_[idx].assign(ns, T(0));
      out_[idx].assign(ns, T(0));
      skip_[idx].assign(sp.has_proj ? ns : 0, T(0));
      pooled_[idx].assign(ns / 2, T(0));
      argmax_[idx].assign(ns / 2, 0);
      dsum_[idx].assign(ns, T(0));
      da_[idx].assign(ns, T(0));
      gin_[idx].assign(b * cin * cur_l, T(0));
    }
    gpool_.assign(b * plan_.feat_dim * (l0 >> nstage), T(0));
    feat_.assign(b * plan_.feat_dim, T(0));
    dfeat_.assign(b * plan_.feat_dim, T(0));
    logits_.assign(b * plan_.head_out, T(0));
    capacity_ = batch;
  }

  NetPlan plan_;
  NetLayout layout_;
  std::vector<T> params_, grads_;

  int capacity_ = 0;
  int batch_ = 0;
  std::vector<T> x_in_, stem_y_;
  std::vector<std::vector<T>> a_, out_, skip_, pooled_, dsum_, da_, gin_;
  std::vector<std::vector<std::uint8_t>> argmax_;
  std::vector<T> gpool_, feat_, dfeat_, logits_;
};

}  // namespace mixsei::nn::detail
