#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "mixsei/checkpoint.hpp"
#include "mixsei/errors.hpp"
#include "mixsei/metrics.hpp"
#include "mixsei/rng.hpp"
#include "mixsei/train.hpp"
#include "test_util.hpp"

using mixsei::dataset::Dataset;
using mixsei::dataset::LabeledExample;
using mixsei::model::ArchConfig;
using mixsei::model::ArchKind;
using mixsei::train::Precision;
using mixsei::train::TrainConfig;
using mixsei::train::TrainResult;

namespace {

Dataset make_dataset(int n, int k, int t, std::uint64_t seed) {
  Dataset ds;
  ds.manifest.k = k;
  ds.manifest.t = t;
  ds.manifest.snr_grid_db = {0.0};
  ds.manifest.version = "test";
  mixsei::RngStream rng(seed, 0);
  for (int i = 0; i < n; ++i) {
    LabeledExample ex;
    ex.label_mask = 1 + static_cast<std::uint32_t>(rng.uniform_int((1u << k) - 1));
    ex.snr_db = 0.0f;
    ex.window.resize(2 * static_cast<std::size_t>(t));
    for (auto& v : ex.window) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    ds.examples.push_back(ex);
  }
  return ds;
}

ArchConfig tiny_arch(ArchKind kind, int k, int t) {
  ArchConfig a;
  a.kind = kind;
  a.k = k;
  a.extractor.input_len = t;
  a.extractor.width_mult = 0.25;
  return a;
}

TrainConfig quick_cfg(int epochs, std::uint64_t seed = 0) {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs = epochs;
  cfg.seed = seed;
  return cfg;
}

std::vector<double> f32_rounded(std::vector<double> p) {
  for (double& v : p) v = static_cast<double>(static_cast<float>(v));
  return p;
}

bool same_params(const std::vector<double>& a, const std::vector<double>& b) {
  return a == b;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("train config validation names the offending field") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  auto expect_field = [](TrainConfig c, const char* field) {
    try {
      c.validate();
      FAIL("accepted invalid " << field);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };
  TrainConfig c = cfg;
  c.batch_size = 0;
  expect_field(c, "batch_size");
  c = cfg;
  c.epochs = -1;
  expect_field(c, "epochs");
  c = cfg;
  c.lr = -1.0;
  expect_field(c, "lr");
  c = cfg;
  c.theta = 1.0;
  expect_field(c, "theta");
  c = cfg;
  c.lr_step_epochs = 0;
  expect_field(c, "lr_step_epochs");
  c = cfg;
  c.lr_gamma = 0.0;
  expect_field(c, "lr_gamma");
}

TEST_CASE("zero learning rate returns the float-rounded initial weights") {
  const Dataset ds = make_dataset(6, 2, 16, 1);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  TrainConfig cfg = quick_cfg(2, 9);
  cfg.lr = 0.0;
  const TrainResult res = mixsei::train::train(arch, ds, nullptr, cfg);

  const mixsei::model::Model init = mixsei::model::init_model(arch, 9);
  CHECK(same_params(res.model.params, f32_rounded(init.params)));
  CHECK(res.log.size() == 2);
  CHECK(res.log[0].train_loss == doctest::Approx(res.log[1].train_loss).epsilon(1e-12));
}

TEST_CASE("a single example is memorized (loss < 1e-2, perfect metrics)") {
  const Dataset ds = make_dataset(1, 2, 16, 3);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.epochs = 200;
  cfg.lr = 0.02;
  cfg.lr_step_epochs = 200;  // flat schedule for the whole run
  cfg.seed = 4;
  const TrainResult res = mixsei::train::train(arch, ds, nullptr, cfg);

  REQUIRE(res.log.size() == 200);
  CHECK(res.log.back().train_loss < 1e-2);
  CHECK(res.log.back().train_loss >= 0.0);
  CHECK(res.final_train.subset_accuracy == 1.0);
  CHECK(res.final_train.hamming_accuracy == 1.0);
  CHECK(res.final_train.macro_f1 == 1.0);
  CHECK(res.final_train.n == 1);
}

TEST_CASE("training is bit-deterministic in the seed (double precision)") {
  const Dataset ds = make_dataset(10, 2, 16, 5);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  const TrainConfig cfg = quick_cfg(3, 11);

  const TrainResult a = mixsei::train::train(arch, ds, nullptr, cfg);
  const TrainResult b = mixsei::train::train(arch, ds, nullptr, cfg);
  CHECK(same_params(a.model.params, b.model.params));
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].lr == b.log[i].lr);
  }
  CHECK(mixsei::train::epoch_log_csv(a.log) == mixsei::train::epoch_log_csv(b.log));

  TrainConfig other = cfg;
  other.seed = 12;
  const TrainResult c = mixsei::train::train(arch, ds, nullptr, other);
  CHECK_FALSE(same_params(a.model.params, c.model.params));
}

TEST_CASE("float32 training is deterministic too") {
  const Dataset ds = make_dataset(8, 2, 16, 6);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  TrainConfig cfg = quick_cfg(2, 3);
  cfg.precision = Precision::F32;
  const TrainResult a = mixsei::train::train(arch, ds, nullptr, cfg);
  const TrainResult b = mixsei::train::train(arch, ds, nullptr, cfg);
  CHECK(same_params(a.model.params, b.model.params));
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
  }
  for (double p : a.model.params) {
    CHECK(std::isfinite(p));
    CHECK(p == static_cast<double>(static_cast<float>(p)));  // checkpoint form
  }
}

TEST_CASE("the final training metrics are exactly what eval reproduces") {
  const Dataset ds = make_dataset(12, 2, 16, 7);
  for (ArchKind kind : {ArchKind::Smei, ArchKind::Baseline}) {
    const ArchConfig arch = tiny_arch(kind, 2, 16);
    const TrainConfig cfg = quick_cfg(3, 2);
    const TrainResult res = mixsei::train::train(arch, ds, nullptr, cfg);
    const mixsei::metrics::MetricsReport again =
        mixsei::metrics::evaluate(res.model, ds, cfg.theta);
    CHECK(res.final_train.subset_accuracy == again.subset_accuracy);
    CHECK(res.final_train.hamming_accuracy == again.hamming_accuracy);
    CHECK(res.final_train.macro_f1 == again.macro_f1);
    CHECK(res.final_train.n == again.n);
  }
}

TEST_CASE("a validation split fills the log and the final report") {
  const Dataset tr = make_dataset(10, 2, 16, 8);
  const Dataset va = make_dataset(6, 2, 16, 9);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  const TrainConfig cfg = quick_cfg(2, 5);
  const TrainResult res = mixsei::train::train(arch, tr, &va, cfg);

  for (const auto& rec : res.log) {
    CHECK(rec.has_val);
    CHECK(rec.val_subset >= 0.0);
    CHECK(rec.val_subset <= 1.0);
    CHECK(rec.val_hamming >= rec.val_subset);
  }
  REQUIRE(res.final_val.has_value());
  const mixsei::metrics::MetricsReport again =
      mixsei::metrics::evaluate(res.model, va, cfg.theta);
  CHECK(res.final_val->subset_accuracy == again.subset_accuracy);
  CHECK(res.final_val->n == 6);
}

TEST_CASE("epoch log CSV layout") {
  const Dataset tr = make_dataset(6, 2, 16, 10);
  const Dataset va = make_dataset(4, 2, 16, 11);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);

  const TrainResult no_val = mixsei::train::train(arch, tr, nullptr, quick_cfg(2));
  const std::string csv = mixsei::train::epoch_log_csv(no_val.log);
  CHECK(csv.rfind("epoch,lr,train_loss,val_subset_acc,val_hamming_acc,val_macro_f1\n",
                  0) == 0);
  CHECK(csv.find(",,,") != std::string::npos);  // empty validation columns
  CHECK(csv.find("\n1,") != std::string::npos);  // epochs are 1-based

  const TrainResult with_val = mixsei::train::train(arch, tr, &va, quick_cfg(2));
  const std::string csv2 = mixsei::train::epoch_log_csv(with_val.log);
  CHECK(csv2.find(",,,") == std::string::npos);
}

TEST_CASE("learning-rate schedule shows up in the log") {
  const Dataset ds = make_dataset(4, 2, 16, 12);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  TrainConfig cfg = quick_cfg(5, 1);
  cfg.lr = 1e-3;
  cfg.lr_step_epochs = 2;
  cfg.lr_gamma = 0.5;
  const TrainResult res = mixsei::train::train(arch, ds, nullptr, cfg);
  REQUIRE(res.log.size() == 5);
  CHECK(res.log[0].lr == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(res.log[1].lr == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(res.log[2].lr == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(res.log[3].lr == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(res.log[4].lr == doctest::Approx(2.5e-4).epsilon(1e-15));
}

TEST_CASE("architecture/dataset mismatches are rejected up front") {
  const Dataset ds = make_dataset(4, 2, 16, 13);
  const TrainConfig cfg = quick_cfg(1);

  CHECK_THROWS_AS(mixsei::train::train(tiny_arch(ArchKind::Smei, 3, 16), ds, nullptr, cfg),
                  mixsei::ShapeError);
  CHECK_THROWS_AS(mixsei::train::train(tiny_arch(ArchKind::Smei, 2, 32), ds, nullptr, cfg),
                  mixsei::ShapeError);

  Dataset empty;
  empty.manifest.k = 2;
  empty.manifest.t = 16;
  CHECK_THROWS_AS(mixsei::train::train(tiny_arch(ArchKind::Smei, 2, 16), empty, nullptr, cfg),
                  std::invalid_argument);

  const Dataset va = make_dataset(2, 3, 24, 14);
  CHECK_THROWS_AS(mixsei::train::train(tiny_arch(ArchKind::Smei, 2, 16), ds, &va, cfg),
                  mixsei::ShapeError);
}

TEST_CASE("the subset-softmax head refuses empty active sets") {
  Dataset ds = make_dataset(4, 2, 16, 15);
  ds.examples[2].label_mask = 0;
  const TrainConfig cfg = quick_cfg(1);
  CHECK_THROWS_AS(
      mixsei::train::train(tiny_arch(ArchKind::Baseline, 2, 16), ds, nullptr, cfg),
      std::invalid_argument);
}

TEST_CASE("checkpoints round-trip the trained model bit-exactly") {
  const Dataset ds = make_dataset(6, 2, 16, 16);
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  const TrainResult res = mixsei::train::train(arch, ds, nullptr, quick_cfg(2, 21));

  mixsei::test::TempDir dir("ckpt");
  const std::string path = dir.file("model.smnw");
  save_checkpoint(path, res.model, "{\"note\":\"unit\"}");

  const mixsei::model::Checkpoint loaded = mixsei::model::load_checkpoint(path);
  CHECK(same_params(loaded.model.params, res.model.params));
  CHECK(loaded.model.arch.kind == arch.kind);
  CHECK(loaded.model.arch.k == arch.k);
  CHECK(loaded.model.arch.extractor.input_len == 16);
  CHECK(loaded.model.arch.extractor.width_mult == 0.25);
  CHECK(loaded.meta_json.find("unit") != std::string::npos);

  // Same metrics through the loaded copy: the full train -> save -> load ->
  // eval chain is lossless.
  const mixsei::metrics::MetricsReport again =
      mixsei::metrics::evaluate(loaded.model, ds, 0.5);
  CHECK(again.subset_accuracy == res.final_train.subset_accuracy);
  CHECK(again.hamming_accuracy == res.final_train.hamming_accuracy);
  CHECK(again.macro_f1 == res.final_train.macro_f1);
}

TEST_CASE("checkpoint files reject corruption and foreign content") {
  const ArchConfig arch = tiny_arch(ArchKind::Smei, 2, 16);
  const mixsei::model::Model m = mixsei::model::init_model(arch, 2);
  mixsei::model::Model rounded = m;
  rounded.params = f32_rounded(rounded.params);

  mixsei::test::TempDir dir("ckpt_faults");
  const std::string path = dir.file("good.smnw");
  save_checkpoint(path, rounded);
  const std::vector<std::uint8_t> good = mixsei::test::slurp(path);

  {
    std::vector<std::uint8_t> bad = good;
    bad[bad.size() - 24] ^= 0x10;  // inside the parameter blob
    mixsei::test::spit(dir.file("corrupt.smnw"), bad);
    try {
      mixsei::model::load_checkpoint(dir.file("corrupt.smnw"));
      FAIL("corrupted checkpoint accepted");
    } catch (const mixsei::IoError& e) {
      CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
  }
  {
    std::vector<std::uint8_t> bad(good.begin(), good.end() - 100);
    mixsei::test::spit(dir.file("short.smnw"), bad);
    CHECK_THROWS_AS(mixsei::model::load_checkpoint(dir.file("short.smnw")),
                    mixsei::IoError);
  }
  {
    std::vector<std::uint8_t> bad = good;
    bad[1] = 'X';
    mixsei::test::spit(dir.file("foreign.smnw"), bad);
    try {
      mixsei::model::load_checkpoint(dir.file("foreign.smnw"));
      FAIL("foreign file accepted");
    } catch (const mixsei::IoError& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(mixsei::model::load_checkpoint(dir.file("missing.smnw")),
                  mixsei::IoError);

  // Saving is defensive too: wrong parameter count, broken metadata.
  mixsei::model::Model wrong = rounded;
  wrong.params.pop_back();
  CHECK_THROWS_AS(save_checkpoint(dir.file("w.smnw"), wrong), mixsei::ShapeError);
  CHECK_THROWS_AS(save_checkpoint(dir.file("w.smnw"), rounded, "not json"),
                  mixsei::ConfigError);
}

}  // TEST_SUITE
