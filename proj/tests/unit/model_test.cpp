#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "mixsei/model.hpp"
#include "mixsei/rng.hpp"

using namespace mixsei::model;
using mixsei::dataset::LabelVector;

namespace {

ArchConfig make_arch(ArchKind kind, int k, int input_len = 1024,
                     double width = 1.0) {
  ArchConfig a;
  a.kind = kind;
  a.k = k;
  a.extractor.input_len = input_len;
  a.extractor.width_mult = width;
  return a;
}

// Independent bottom-up parameter count for the full-width plan:
// stem conv(2 -> 32, k7) + three stages of two k3 convs with a 1x1
// projection on every channel change + a dense head on 256 features.
std::size_t ref_param_count(ArchKind kind, int k) {
  auto conv = [](int cin, int cout, int kk) {
    return static_cast<std::size_t>(cout) * cin * kk + cout;
  };
  std::size_t total = conv(2, 32, 7);
  int cin = 32;
  for (int cout : {64, 128, 256}) {
    total += conv(cin, cout, 3) + conv(cout, cout, 3) + conv(cin, cout, 1);
    cin = cout;
  }
  const int head = kind == ArchKind::Smei ? k : (1 << k) - 1;
  total += static_cast<std::size_t>(head) * 256 + head;
  return total;
}

std::vector<float> random_windows(int batch, int t, std::uint64_t seed) {
  mixsei::RngStream rng(seed, 0);
  std::vector<float> w(static_cast<std::size_t>(batch) * 2 * t);
  for (auto& v : w) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return w;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("multi-label head grows by 771 parameters from K=2 to K=5") {
  const std::size_t k2 = param_count(make_arch(ArchKind::Smei, 2));
  const std::size_t k5 = param_count(make_arch(ArchKind::Smei, 5));
  CHECK(k5 - k2 == 771);
  CHECK(k5 - k2 == 257u * 3u);
}

TEST_CASE("subset-softmax head grows by 7196 parameters from K=2 to K=5") {
  const std::size_t k2 = param_count(make_arch(ArchKind::Baseline, 2));
  const std::size_t k5 = param_count(make_arch(ArchKind::Baseline, 5));
  CHECK(k5 - k2 == 7196);
  // The head enumerates every nonempty subset: 2^K - 1 classes, each costing
  // feature_dim + 1 = 257 parameters.
  CHECK(k5 - k2 == 257u * (((1u << 5) - 1) - ((1u << 2) - 1)));
}

TEST_CASE("every additional emitter costs exactly 257 parameters") {
  for (int k = 2; k <= 8; ++k) {
    const std::size_t a = param_count(make_arch(ArchKind::Smei, k));
    const std::size_t b = param_count(make_arch(ArchKind::Smei, k + 1));
    CHECK(b - a == 257);
  }
}

TEST_CASE("head width is 256 features (visible in the layout and the costs)") {
  const auto layout = param_layout(make_arch(ArchKind::Smei, 3));
  REQUIRE(layout.size() >= 2);
  const LayerParam& hw = layout[layout.size() - 2];
  const LayerParam& hb = layout[layout.size() - 1];
  CHECK(hw.name == "head.w");
  CHECK(hw.shape == std::vector<int>{3, 256});
  CHECK(hb.name == "head.b");
  CHECK(hb.shape == std::vector<int>{3});
  CHECK(make_arch(ArchKind::Smei, 3).feature_dim() == 256);
}

TEST_CASE("baseline head covers the non-empty subsets") {
  CHECK(make_arch(ArchKind::Smei, 4).head_out() == 4);
  CHECK(make_arch(ArchKind::Baseline, 4).head_out() == 15);
  const auto layout = param_layout(make_arch(ArchKind::Baseline, 3));
  CHECK(layout[layout.size() - 2].shape == std::vector<int>{7, 256});
}

TEST_CASE("absolute totals match an independent bottom-up count") {
  for (int k : {2, 3, 5}) {
    CHECK(param_count(make_arch(ArchKind::Smei, k)) == ref_param_count(ArchKind::Smei, k));
    CHECK(param_count(make_arch(ArchKind::Baseline, k)) ==
          ref_param_count(ArchKind::Baseline, k));
  }
}

TEST_CASE("layout is contiguous, exhaustive, and consistently named") {
  const ArchConfig arch = make_arch(ArchKind::Smei, 3);
  const auto layout = param_layout(arch);
  std::size_t expected_offset = 0;
  for (const auto& lp : layout) {
    CHECK(lp.offset == expected_offset);
    std::size_t numel = 1;
    for (int d : lp.shape) numel *= static_cast<std::size_t>(d);
    CHECK(lp.count == numel);
    expected_offset += lp.count;
  }
  CHECK(expected_offset == param_count(arch));
  CHECK(layout[0].name == "stem.w");
  CHECK(layout[1].name == "stem.b");
  // Full-width stages change channel count, so each carries a projection.
  bool saw_proj = false;
  for (const auto& lp : layout) saw_proj = saw_proj || lp.name == "stage1.proj.w";
  CHECK(saw_proj);
}

TEST_CASE("equal-channel stages drop the projection") {
  ArchConfig arch = make_arch(ArchKind::Smei, 3);
  arch.extractor.stem_channels = 8;
  arch.extractor.stage_channels = {8, 8, 8};
  const auto layout = param_layout(arch);
  for (const auto& lp : layout) {
    CHECK(lp.name.find("proj") == std::string::npos);
  }
  auto conv = [](int cin, int cout, int kk) {
    return static_cast<std::size_t>(cout) * cin * kk + cout;
  };
  const std::size_t want = conv(2, 8, 7) + 3 * (conv(8, 8, 3) + conv(8, 8, 3)) +
                           static_cast<std::size_t>(3) * 8 + 3;
  CHECK(param_count(arch) == want);
}

TEST_CASE("width multiplier thins channels but keeps them at least 1") {
  CHECK(scaled_channels(32, 1.0) == 32);
  CHECK(scaled_channels(32, 0.25) == 8);
  CHECK(scaled_channels(32, 0.01) == 1);
  CHECK(scaled_channels(3, 0.5) == 2);  // round to nearest

  const std::size_t full = param_count(make_arch(ArchKind::Smei, 3));
  const std::size_t thin = param_count(make_arch(ArchKind::Smei, 3, 1024, 0.25));
  CHECK(thin < full / 10);
}

TEST_CASE("parameter count ignores the input length (GAP decouples it)") {
  CHECK(param_count(make_arch(ArchKind::Smei, 3, 1024)) ==
        param_count(make_arch(ArchKind::Smei, 3, 512)));
}

TEST_CASE("input lengths that do not survive three halvings are rejected") {
  CHECK_NOTHROW(make_arch(ArchKind::Smei, 3, 1024).validate());
  CHECK_NOTHROW(make_arch(ArchKind::Smei, 3, 8).validate());
  CHECK_THROWS_AS(make_arch(ArchKind::Smei, 3, 1020).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_arch(ArchKind::Smei, 3, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_arch(ArchKind::Smei, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_arch(ArchKind::Smei, 17).validate(), std::invalid_argument);
}

TEST_CASE("initialization is seed-deterministic with zero biases") {
  const ArchConfig arch = make_arch(ArchKind::Smei, 3, 64, 0.25);
  const Model a = init_model(arch, 7);
  const Model b = init_model(arch, 7);
  const Model c = init_model(arch, 8);
  CHECK(a.params == b.params);
  CHECK(a.params != c.params);
  REQUIRE(a.params.size() == param_count(arch));

  for (const auto& lp : param_layout(arch)) {
    if (lp.name.size() < 2 || lp.name.substr(lp.name.size() - 2) != ".b") continue;
    for (std::size_t i = 0; i < lp.count; ++i) {
      CHECK(a.params[lp.offset + i] == 0.0);
    }
  }
  // Weights are spread out, not constant.
  double mn = 1e9, mx = -1e9;
  for (std::size_t i = 0; i < param_layout(arch)[0].count; ++i) {
    mn = std::min(mn, a.params[i]);
    mx = std::max(mx, a.params[i]);
  }
  CHECK(mx > mn);
}

TEST_CASE("forward produces finite logits of the right shape") {
  const ArchConfig arch = make_arch(ArchKind::Smei, 3, 64, 0.25);
  const Model m = init_model(arch, 1);
  const int batch = 3;
  const auto windows = random_windows(batch, 64, 5);
  const auto logits = forward_logits(m, windows.data(), batch);
  REQUIRE(logits.size() == static_cast<std::size_t>(batch) * 3);
  for (double v : logits) CHECK(std::isfinite(v));

  const std::vector<float> zeros(static_cast<std::size_t>(batch) * 2 * 64, 0.0f);
  for (double v : forward_logits(m, zeros.data(), batch)) CHECK(std::isfinite(v));
}

TEST_CASE("forward is batch-order equivariant, bit for bit") {
  const ArchConfig arch = make_arch(ArchKind::Smei, 3, 64, 0.25);
  const Model m = init_model(arch, 3);
  const int t = 64;
  const auto w = random_windows(2, t, 9);
  std::vector<float> swapped(w.size());
  std::copy(w.begin() + 2 * t, w.end(), swapped.begin());
  std::copy(w.begin(), w.begin() + 2 * t, swapped.begin() + 2 * t);

  const auto y = forward_logits(m, w.data(), 2);
  const auto ys = forward_logits(m, swapped.data(), 2);
  const std::size_t row = y.size() / 2;
  for (std::size_t i = 0; i < row; ++i) {
    CHECK(y[i] == ys[row + i]);
    CHECK(y[row + i] == ys[i]);
  }
  // Single-example run matches its row inside the batch.
  const auto solo = forward_logits(m, w.data(), 1);
  for (std::size_t i = 0; i < row; ++i) CHECK(solo[i] == y[i]);
}

TEST_CASE("probabilities: sigmoid per label, softmax over subsets") {
  const auto w = random_windows(4, 64, 13);

  const Model ms = init_model(make_arch(ArchKind::Smei, 3, 64, 0.25), 2);
  const auto ps = forward_probs(ms, w.data(), 4);
  REQUIRE(ps.size() == 12);
  for (double p : ps) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }

  const Model mb = init_model(make_arch(ArchKind::Baseline, 3, 64, 0.25), 2);
  const auto pb = forward_probs(mb, w.data(), 4);
  REQUIRE(pb.size() == 4u * 7);
  for (int bi = 0; bi < 4; ++bi) {
    double row = 0.0;
    for (int c = 0; c < 7; ++c) {
      CHECK(pb[bi * 7 + c] >= 0.0);
      row += pb[bi * 7 + c];
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("strict threshold decisions and their monotonicity") {
  const std::vector<double> probs = {0.6, 0.5, 0.4};
  const LabelVector at_half = decide_set(probs, 0.5);
  CHECK(at_half.bits == std::vector<std::uint8_t>{1, 0, 0});  // 0.5 is NOT > 0.5

  const LabelVector lo = decide_set(probs, 0.1);
  const LabelVector hi = decide_set(probs, 0.9);
  CHECK(lo.bits == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(hi.bits == std::vector<std::uint8_t>{0, 0, 0});
  // Raising theta can only drop emitters.
  for (int i = 0; i < 3; ++i) {
    CHECK(hi.bits[i] <= at_half.bits[i]);
    CHECK(at_half.bits[i] <= lo.bits[i]);
  }

  CHECK_THROWS_AS(decide_set(probs, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(decide_set(probs, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(decide_set(probs, -0.5), std::invalid_argument);
}

TEST_CASE("subset codec maps masks to dense class indices") {
  CHECK(subset_to_class(LabelVector::from_mask(0b001, 3)) == 0);
  CHECK(subset_to_class(LabelVector::from_mask(0b011, 3)) == 2);
  CHECK(subset_to_class(LabelVector::from_mask(0b111, 3)) == 6);
  CHECK(class_to_subset(0, 3).mask() == 0b001u);
  CHECK(class_to_subset(2, 3).mask() == 0b011u);

  for (int k = 1; k <= 5; ++k) {
    for (int cls = 0; cls < (1 << k) - 1; ++cls) {
      CHECK(subset_to_class(class_to_subset(cls, k)) == cls);
    }
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
      CHECK(class_to_subset(subset_to_class(LabelVector::from_mask(mask, k)), k).mask() ==
            mask);
    }
  }

  CHECK_THROWS_AS(subset_to_class(LabelVector::from_mask(0, 3)), std::invalid_argument);
  CHECK_THROWS_AS(class_to_subset(7, 3), std::invalid_argument);
  CHECK_THROWS_AS(class_to_subset(-1, 3), std::invalid_argument);
}

TEST_CASE("architecture names round-trip") {
  CHECK(std::string(arch_name(ArchKind::Smei)) == "smei");
  CHECK(std::string(arch_name(ArchKind::Baseline)) == "baseline");
  CHECK(arch_from_name("smei") == ArchKind::Smei);
  CHECK(arch_from_name("baseline") == ArchKind::Baseline);
  CHECK_THROWS_AS(arch_from_name("mlp"), std::invalid_argument);
}

TEST_CASE("forward rejects parameter vectors from a different architecture") {
  Model m = init_model(make_arch(ArchKind::Smei, 3, 64, 0.25), 1);
  m.params.pop_back();
  const auto w = random_windows(1, 64, 1);
  CHECK_THROWS_AS(forward_logits(m, w.data(), 1), std::invalid_argument);
  Model ok = init_model(make_arch(ArchKind::Smei, 3, 64, 0.25), 1);
  CHECK_THROWS_AS(forward_logits(ok, w.data(), 0), std::invalid_argument);
}

}  // TEST_SUITE
