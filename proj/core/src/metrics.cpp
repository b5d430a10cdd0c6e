#include "mixsei/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "mixsei/errors.hpp"
#include "mixsei/version.hpp"

namespace mixsei::metrics {

namespace {

void check_pair(const std::vector<dataset::LabelVector>& pred,
                const std::vector<dataset::LabelVector>& truth) {
  if (pred.empty() || pred.size() != truth.size()) {
    throw std::invalid_argument(
        "metrics: prediction and truth lists must be equal-length and non-empty");
  }
  const int k = truth.front().k();
  if (k < 1) throw std::invalid_argument("metrics: label vectors must be non-empty");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].k() != k || truth[i].k() != k) {
      throw std::invalid_argument("metrics: all label vectors must share one emitter count");
    }
  }
}

std::vector<EmitterCounts> count_per_emitter(
    const std::vector<dataset::LabelVector>& pred,
    const std::vector<dataset::LabelVector>& truth) {
  const int k = truth.front().k();
  std::vector<EmitterCounts> counts(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (int m = 0; m < k; ++m) {
      const bool p = pred[i].bits[static_cast<std::size_t>(m)] != 0;
      const bool t = truth[i].bits[static_cast<std::size_t>(m)] != 0;
      EmitterCounts& c = counts[static_cast<std::size_t>(m)];
      if (p && t) {
        c.tp += 1;
      } else if (p && !t) {
        c.fp += 1;
      } else if (!p && t) {
        c.fn += 1;
      } else {
        c.tn += 1;
      }
    }
  }
  return counts;
}

double macro_f1_from_counts(const std::vector<EmitterCounts>& counts) {
  double sum = 0.0;
  for (const EmitterCounts& c : counts) {
    const std::int64_t denom = 2 * c.tp + c.fp + c.fn;
    sum += denom == 0 ? 1.0
                      : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(counts.size());
}

}  // namespace

double subset_accuracy(const std::vector<dataset::LabelVector>& pred,
                       const std::vector<dataset::LabelVector>& truth) {
  check_pair(pred, truth);
  std::int64_t exact = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) exact += 1;
  }
  return static_cast<double>(exact) / static_cast<double>(pred.size());
}

double hamming_accuracy(const std::vector<dataset::LabelVector>& pred,
                        const std::vector<dataset::LabelVector>& truth) {
  check_pair(pred, truth);
  const int k = truth.front().k();
  std::int64_t agree = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (int m = 0; m < k; ++m) {
      if (pred[i].bits[static_cast<std::size_t>(m)] ==
          truth[i].bits[static_cast<std::size_t>(m)]) {
        agree += 1;
      }
    }
  }
  return static_cast<double>(agree) /
         (static_cast<double>(pred.size()) * static_cast<double>(k));
}

double macro_f1(const std::vector<dataset::LabelVector>& pred,
                const std::vector<dataset::LabelVector>& truth) {
  check_pair(pred, truth);
  return macro_f1_from_counts(count_per_emitter(pred, truth));
}

MetricsReport metrics_report(const std::vector<dataset::LabelVector>& pred,
                             const std::vector<dataset::LabelVector>& truth) {
  check_pair(pred, truth);
  MetricsReport r;
  r.n = static_cast<int>(pred.size());
  r.k = truth.front().k();
  r.per_emitter = count_per_emitter(pred, truth);
  r.subset_accuracy = subset_accuracy(pred, truth);
  r.hamming_accuracy = hamming_accuracy(pred, truth);
  r.macro_f1 = macro_f1_from_counts(r.per_emitter);
  return r;
}

std::vector<dataset::LabelVector> predict_dataset(const model::Model& model,
                                                  const dataset::Dataset& data,
                                                  double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("predict: theta must lie strictly in (0, 1)");
  }
  const int k = data.manifest.k;
  const int t = data.manifest.t;
  if (model.arch.k != k) {
    throw ShapeError("predict: model expects " + std::to_string(model.arch.k) +
                     " emitters but dataset has " + std::to_string(k));
  }
  if (model.arch.extractor.input_len != t) {
    throw ShapeError("predict: model expects window length " +
                     std::to_string(model.arch.extractor.input_len) +
                     " but dataset has " + std::to_string(t));
  }
  constexpr int kBatch = 256;
  const int width = model.arch.head_out();
  std::vector<dataset::LabelVector> out;
  out.reserve(data.examples.size());
  std::vector<float> buf;
  for (std::size_t start = 0; start < data.examples.size(); start += kBatch) {
    const int b = static_cast<int>(
        std::min<std::size_t>(kBatch, data.examples.size() - start));
    buf.assign(static_cast<std::size_t>(b) * 2 * t, 0.0f);
    for (int i = 0; i < b; ++i) {
      const auto& w = data.examples[start + static_cast<std::size_t>(i)].window;
      std::copy(w.begin(), w.end(),
                buf.begin() + static_cast<std::size_t>(i) * 2 * t);
    }
    const std::vector<double> probs = model::forward_probs(model, buf.data(), b);
    for (int i = 0; i < b; ++i) {
      const double* row = probs.data() + static_cast<std::size_t>(i) * width;
      if (model.arch.kind == model::ArchKind::Smei) {
        out.push_back(model::decide_set(
            std::vector<double>(row, row + width), theta));
      } else {
        int best = 0;
        for (int j = 1; j < width; ++j) {
          if (row[j] > row[best]) best = j;
        }
        out.push_back(model::class_to_subset(best, k));
      }
    }
  }
  return out;
}

MetricsReport evaluate(const model::Model& model, const dataset::Dataset& data,
                       double theta) {
  if (data.examples.empty()) {
    throw std::invalid_argument("evaluate: dataset has no examples");
  }
  const std::vector<dataset::LabelVector> pred = predict_dataset(model, data, theta);
  std::vector<dataset::LabelVector> truth;
  truth.reserve(data.examples.size());
  for (const auto& ex : data.examples) truth.push_back(ex.label(data.manifest.k));
  return metrics_report(pred, truth);
}

SweepReport sweep_report(const model::Model& model, const dataset::Dataset& data,
                         double theta) {
  if (data.examples.empty()) {
    throw std::invalid_argument("sweep: dataset has no examples");
  }
  const std::vector<dataset::LabelVector> pred = predict_dataset(model, data, theta);
  std::vector<dataset::LabelVector> truth;
  truth.reserve(data.examples.size());
  for (const auto& ex : data.examples) truth.push_back(ex.label(data.manifest.k));

  SweepReport rep;
  rep.overall = metrics_report(pred, truth);

  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    groups[static_cast<double>(data.examples[i].snr_db)].push_back(i);
  }
  for (const auto& [snr, idx] : groups) {
    std::vector<dataset::LabelVector> gp, gt;
    gp.reserve(idx.size());
    gt.reserve(idx.size());
    for (std::size_t i : idx) {
      gp.push_back(pred[i]);
      gt.push_back(truth[i]);
    }
    const MetricsReport r = metrics_report(gp, gt);
    SweepRow row;
    row.snr_db = snr;
    row.arch = model::arch_name(model.arch.kind);
    row.overlap = dataset::overlap_name(data.manifest.overlap);
    row.channel = dataset::channel_name(data.manifest.channel_kind);
    row.subset_acc = r.subset_accuracy;
    row.hamming_acc = r.hamming_accuracy;
    row.macro_f1 = r.macro_f1;
    row.n = r.n;
    rep.rows.push_back(row);
  }
  return rep;
}

std::string sweep_csv(const SweepReport& report,
                      const dataset::DatasetManifest& manifest, double theta) {
  std::string out;
  char line[256];
  out += "# mixsei report, library version ";
  out += version();
  out += "\n";
  std::snprintf(line, sizeof(line), "# theta=%.6g\n", theta);
  out += line;
  out += "# macro F1 convention: an emitter with TP=FP=FN=0 scores F1=1\n";
  out += "# dataset manifest: ";
  out += dataset::manifest_to_json(manifest);
  out += "\n";
  out += "snr_db,arch,overlap,channel,subset_acc,hamming_acc,macro_f1,n\n";
  for (const SweepRow& r : report.rows) {
    std::snprintf(line, sizeof(line), "%.10g,%s,%s,%s,%.6f,%.6f,%.6f,%d\n",
                  r.snr_db, r.arch.c_str(), r.overlap.c_str(), r.channel.c_str(),
                  r.subset_acc, r.hamming_acc, r.macro_f1, r.n);
    out += line;
  }
  return out;
}

}  // namespace mixsei::metrics
