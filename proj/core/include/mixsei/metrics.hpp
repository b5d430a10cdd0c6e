#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixsei/dataset.hpp"
#include "mixsei/model.hpp"

namespace mixsei::metrics {

struct EmitterCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
};

struct MetricsReport {
  double subset_accuracy = 0.0;
  double hamming_accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<EmitterCounts> per_emitter;
  int n = 0;
  int k = 0;
};

// All three metrics take parallel lists of predicted and true label vectors
// (equal length >= 1, uniform emitter count) and are computed from exact
// integer counts, dividing only at the end.
double subset_accuracy(const std::vector<dataset::LabelVector>& pred,
                       const std::vector<dataset::LabelVector>& truth);
double hamming_accuracy(const std::vector<dataset::LabelVector>& pred,
                        const std::vector<dataset::LabelVector>& truth);
// Unweighted mean of per-emitter F1 = 2TP/(2TP+FP+FN); an emitter with
// TP=FP=FN=0 contributes 1 (nothing to find, nothing claimed).
double macro_f1(const std::vector<dataset::LabelVector>& pred,
                const std::vector<dataset::LabelVector>& truth);

MetricsReport metrics_report(const std::vector<dataset::LabelVector>& pred,
                             const std::vector<dataset::LabelVector>& truth);

// Model-driven evaluation. Predictions use the sigmoid threshold rule for
// the multi-label head and argmax-over-subsets for the baseline head.
std::vector<dataset::LabelVector> predict_dataset(const model::Model& model,
                                                  const dataset::Dataset& data,
                                                  double theta);
MetricsReport evaluate(const model::Model& model, const dataset::Dataset& data,
                       double theta);

struct SweepRow {
  double snr_db = 0.0;
  std::string arch;
  std::string overlap;
  std::string channel;
  double subset_acc = 0.0;
  double hamming_acc = 0.0;
  double macro_f1 = 0.0;
  int n = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // ascending SNR
  MetricsReport overall;
};

SweepReport sweep_report(const model::Model& model, const dataset::Dataset& data,
                         double theta);

// CSV with `#` comment header (tool version, arch, theta, degenerate-F1
// convention, dataset manifest) followed by
// snr_db,arch,overlap,channel,subset_acc,hamming_acc,macro_f1,n rows.
std::string sweep_csv(const SweepReport& report,
                      const dataset::DatasetManifest& manifest, double theta);

}  // namespace mixsei::metrics
