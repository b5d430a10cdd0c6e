#include "mixsei/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mixsei/detail/net.hpp"
#include "mixsei/errors.hpp"
#include "mixsei/optim.hpp"
#include "mixsei/rng.hpp"

namespace mixsei::train {

namespace {

constexpr std::uint64_t kShuffleStreamBase = 0xE40C0000u;

void check_compat(const model::ArchConfig& arch, const dataset::Dataset& data,
                  const char* split) {
  if (data.examples.empty()) {
    throw std::invalid_argument(std::string("train: ") + split +
                                " dataset has no examples");
  }
  if (data.manifest.k != arch.k) {
    throw ShapeError(std::string("train: model expects ") +
                     std::to_string(arch.k) + " emitters but " + split +
                     " dataset has " + std::to_string(data.manifest.k));
  }
  if (data.manifest.t != arch.extractor.input_len) {
    throw ShapeError(std::string("train: model expects window length ") +
                     std::to_string(arch.extractor.input_len) + " but " + split +
                     " dataset has " + std::to_string(data.manifest.t));
  }
  for (const auto& ex : data.examples) {
    if (ex.t() != data.manifest.t) {
      throw ShapeError(std::string("train: ") + split +
                       " dataset contains a window of unexpected length");
    }
  }
}

template <class T>
struct BatchBuffers {
  std::vector<float> windows;
  std::vector<T> labels;     // multi-label targets
  std::vector<int> classes;  // subset-softmax targets
  std::vector<T> dlogits;
};

// Evaluate the current master weights on a dataset using the training
// compute type; used for the per-epoch validation columns of the log.
template <class T>
metrics::MetricsReport quick_eval(nn::detail::Net<T>& net,
                                  const std::vector<double>& master,
                                  const model::ArchConfig& arch,
                                  const dataset::Dataset& data, double theta,
                                  int batch_size) {
  net.load_params(master);
  const int t = data.manifest.t;
  const int k = arch.k;
  const int width = arch.head_out();
  const std::size_t n = data.examples.size();
  std::vector<float> buf;
  std::vector<dataset::LabelVector> pred, truth;
  pred.reserve(n);
  truth.reserve(n);
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    const int b = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(batch_size), n - start));
    buf.assign(static_cast<std::size_t>(b) * 2 * t, 0.0f);
    for (int i = 0; i < b; ++i) {
      const auto& w = data.examples[start + static_cast<std::size_t>(i)].window;
      std::copy(w.begin(), w.end(), buf.begin() + static_cast<std::size_t>(i) * 2 * t);
    }
    const T* logits = net.forward(buf.data(), b);
    for (int i = 0; i < b; ++i) {
      const T* row = logits + static_cast<std::size_t>(i) * width;
      dataset::LabelVector lv;
      if (arch.kind == model::ArchKind::Smei) {
        lv.bits.resize(static_cast<std::size_t>(k));
        for (int m = 0; m < k; ++m) {
          const double p = 1.0 / (1.0 + std::exp(-static_cast<double>(row[m])));
          lv.bits[static_cast<std::size_t>(m)] = p > theta ? 1 : 0;
        }
      } else {
        int best = 0;
        for (int j = 1; j < width; ++j) {
          if (row[j] > row[best]) best = j;
        }
        lv = model::class_to_subset(best, k);
      }
      pred.push_back(std::move(lv));
      truth.push_back(
          data.examples[start + static_cast<std::size_t>(i)].label(k));
    }
  }
  return metrics::metrics_report(pred, truth);
}

template <class T>
TrainResult run_train(const model::ArchConfig& arch,
                      const dataset::Dataset& train_data,
                      const dataset::Dataset* val_data, const TrainConfig& cfg) {
  const nn::detail::NetPlan plan = model::net_plan(arch);
  nn::detail::Net<T> net(plan);

  model::Model m = model::init_model(arch, cfg.seed);
  std::vector<double>& master = m.params;

  nn::AdamState opt(master.size());
  opt.beta1 = cfg.beta1;
  opt.beta2 = cfg.beta2;
  opt.eps = cfg.eps;
  opt.lr0 = cfg.lr;
  opt.step_size = cfg.lr_step_epochs;
  opt.gamma = cfg.lr_gamma;

  const int k = arch.k;
  const int width = arch.head_out();
  const int t = train_data.manifest.t;
  const std::size_t n = train_data.examples.size();
  const bool multi_label = arch.kind == model::ArchKind::Smei;

  // Targets, precomputed once.
  std::vector<T> all_labels;
  std::vector<int> all_classes;
  if (multi_label) {
    all_labels.resize(n * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
      const dataset::LabelVector lv = train_data.examples[i].label(k);
      for (int mth = 0; mth < k; ++mth) {
        all_labels[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(mth)] =
            static_cast<T>(lv.bits[static_cast<std::size_t>(mth)]);
      }
    }
  } else {
    all_classes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (train_data.examples[i].label_mask == 0) {
        throw std::invalid_argument(
            "train: subset-softmax head requires non-empty active sets");
      }
      all_classes[i] = model::subset_to_class(train_data.examples[i].label(k));
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  BatchBuffers<T> bufs;
  std::vector<double> grads_d;
  TrainResult result;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = nn::steplr(opt, epoch);

    RngStream shuffle_rng(cfg.seed, kShuffleStreamBase + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = shuffle_rng.uniform_int(i);
      std::swap(order[i - 1], order[j]);
    }

    double loss_weighted = 0.0;
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const int b = static_cast<int>(std::min<std::size_t>(
          static_cast<std::size_t>(cfg.batch_size), n - start));

      bufs.windows.assign(static_cast<std::size_t>(b) * 2 * t, 0.0f);
      if (multi_label) {
        bufs.labels.assign(static_cast<std::size_t>(b) * k, T(0));
      } else {
        bufs.classes.assign(static_cast<std::size_t>(b), 0);
      }
      for (int i = 0; i < b; ++i) {
        const std::size_t src = order[start + static_cast<std::size_t>(i)];
        const auto& w = train_data.examples[src].window;
        std::copy(w.begin(), w.end(),
                  bufs.windows.begin() + static_cast<std::size_t>(i) * 2 * t);
        if (multi_label) {
          std::copy(all_labels.begin() + src * static_cast<std::size_t>(k),
                    all_labels.begin() + (src + 1) * static_cast<std::size_t>(k),
                    bufs.labels.begin() + static_cast<std::size_t>(i) * k);
        } else {
          bufs.classes[static_cast<std::size_t>(i)] = all_classes[src];
        }
      }

      net.load_params(master);
      net.zero_grads();
      const T* logits = net.forward(bufs.windows.data(), b);
      bufs.dlogits.assign(static_cast<std::size_t>(b) * width, T(0));
      T loss;
      if (multi_label) {
        loss = nn::bce_with_logits(logits, bufs.labels.data(), b, k,
                                   bufs.dlogits.data());
      } else {
        loss = nn::softmax_cross_entropy(logits, bufs.classes.data(), b, width,
                                         bufs.dlogits.data());
      }
      net.backward(bufs.dlogits.data());
      net.store_grads(grads_d);
      nn::adam_step(master, grads_d, opt, lr);
      loss_weighted += static_cast<double>(loss) * b;
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = lr;
    rec.train_loss = loss_weighted / static_cast<double>(n);
    if (val_data) {
      const metrics::MetricsReport vr =
          quick_eval(net, master, arch, *val_data, cfg.theta, 256);
      rec.has_val = true;
      rec.val_subset = vr.subset_accuracy;
      rec.val_hamming = vr.hamming_accuracy;
      rec.val_macro_f1 = vr.macro_f1;
    }
    result.log.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec);
  }

  // Round to the checkpoint's float32 storage so the returned model, the
  // saved checkpoint, and every later evaluation agree bit-for-bit.
  for (double& p : master) p = static_cast<double>(static_cast<float>(p));
  result.model = std::move(m);
  result.final_train = metrics::evaluate(result.model, train_data, cfg.theta);
  if (val_data) {
    result.final_val = metrics::evaluate(result.model, *val_data, cfg.theta);
  }
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train.batch_size: must be >= 1");
  if (epochs < 0) throw std::invalid_argument("train.epochs: must be >= 0");
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("train.lr: must be finite and >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    throw std::invalid_argument("train.beta1: must lie in [0, 1)");
  }
  if (!(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train.beta2: must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("train.eps: must be > 0");
  if (lr_step_epochs < 1) {
    throw std::invalid_argument("train.lr_step_epochs: must be >= 1");
  }
  if (!(lr_gamma > 0.0)) throw std::invalid_argument("train.lr_gamma: must be > 0");
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::invalid_argument("train.theta: must lie strictly in (0, 1)");
  }
}

TrainResult train(const model::ArchConfig& arch,
                  const dataset::Dataset& train_data,
                  const dataset::Dataset* val_data, const TrainConfig& cfg) {
  cfg.validate();
  arch.validate();
  check_compat(arch, train_data, "training");
  if (val_data) check_compat(arch, *val_data, "validation");
  if (cfg.precision == Precision::F64) {
    return run_train<double>(arch, train_data, val_data, cfg);
  }
  return run_train<float>(arch, train_data, val_data, cfg);
}

std::string epoch_log_csv(const std::vector<EpochRecord>& log) {
  std::string out = "epoch,lr,train_loss,val_subset_acc,val_hamming_acc,val_macro_f1\n";
  char line[192];
  for (const EpochRecord& r : log) {
    if (r.has_val) {
      std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,%.6f,%.6f,%.6f\n",
                    r.epoch, r.lr, r.train_loss, r.val_subset, r.val_hamming,
                    r.val_macro_f1);
    } else {
      std::snprintf(line, sizeof(line), "%d,%.10g,%.10g,,,\n", r.epoch, r.lr,
                    r.train_loss);
    }
    out += line;
  }
  return out;
}

}  // namespace mixsei::train
