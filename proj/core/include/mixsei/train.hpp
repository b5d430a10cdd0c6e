#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixsei/metrics.hpp"
#include "mixsei/model.hpp"

namespace mixsei::train {

// F64 is the reproducibility mode (bit-identical logs and checkpoints for a
// seed); F32 computes forward/backward in float32 with double master
// weights and optimizer state, for desk-scale wall-clock budgets. Both are
// deterministic; they just differ numerically from each other.
enum class Precision { F64, F32 };

struct EpochRecord {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;
  bool has_val = false;
  double val_subset = 0.0;
  double val_hamming = 0.0;
  double val_macro_f1 = 0.0;
};

struct TrainConfig {
  int batch_size = 64;
  int epochs = 100;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int lr_step_epochs = 20;
  double lr_gamma = 0.5;
  double theta = 0.5;
  std::uint64_t seed = 0;
  Precision precision = Precision::F64;
  // Called after each epoch with its freshly appended record (progress
  // reporting). Never affects the computation; leave empty for silence.
  std::function<void(const EpochRecord&)> on_epoch;

  void validate() const;
};

struct TrainResult {
  model::Model model;  // parameters rounded through float32 (checkpoint form)
  std::vector<EpochRecord> log;
  // Metrics of the returned model on the training split (and validation
  // split when given), computed through the same evaluation path `eval`
  // uses — so re-evaluating the saved checkpoint reproduces them exactly.
  metrics::MetricsReport final_train;
  std::optional<metrics::MetricsReport> final_val;
};

// Minibatch Adam with step-decay schedule over shuffled epochs,
// deterministic in cfg.seed. Multi-label heads train with binary cross
// entropy per emitter; the subset-softmax head with cross entropy.
TrainResult train(const model::ArchConfig& arch,
                  const dataset::Dataset& train_data,
                  const dataset::Dataset* val_data, const TrainConfig& cfg);

// epoch,lr,train_loss,val_subset_acc,val_hamming_acc,val_macro_f1 rows;
// validation columns are empty when no validation split was given.
std::string epoch_log_csv(const std::vector<EpochRecord>& log);

}  // namespace mixsei::train
