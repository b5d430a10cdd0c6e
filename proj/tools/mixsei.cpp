// mixsei: synthesize overlapped-emitter datasets, train and evaluate
// set-valued emitter identifiers, and emit metric reports.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mixsei/checkpoint.hpp"
#include "mixsei/config.hpp"
#include "mixsei/dataset.hpp"
#include "mixsei/errors.hpp"
#include "mixsei/metrics.hpp"
#include "mixsei/model.hpp"
#include "mixsei/train.hpp"
#include "mixsei/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitShape = 4;

void write_text_file(const std::string& path, const std::string& text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw mixsei::IoError("cannot open file for writing: " + path);
  const std::size_t n = std::fwrite(text.data(), 1, text.size(), f);
  const bool ok = n == text.size() && std::fclose(f) == 0;
  if (!ok) throw mixsei::IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw mixsei::IoError("cannot open file: " + path);
  std::string out;
  char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

struct CommonOpts {
  std::string config_path;
};

mixsei::config::ExperimentConfig load_or_default(const CommonOpts& common) {
  if (common.config_path.empty()) return mixsei::config::default_config();
  return mixsei::config::load_config(common.config_path);
}

json metrics_json(const mixsei::metrics::MetricsReport& r) {
  json j;
  j["subset_accuracy"] = r.subset_accuracy;
  j["hamming_accuracy"] = r.hamming_accuracy;
  j["macro_f1"] = r.macro_f1;
  j["n"] = r.n;
  j["k"] = r.k;
  return j;
}

int cmd_synth(const CommonOpts& common, std::optional<std::uint64_t> seed,
              std::optional<std::uint64_t> count, std::string out) {
  mixsei::config::ExperimentConfig cfg = load_or_default(common);
  if (seed) cfg.synth_seed = *seed;
  if (count) cfg.synth_count = *count;
  if (!out.empty()) cfg.out_dataset = out;
  if (cfg.out_dataset.empty()) {
    throw mixsei::ConfigError("synth: no output path (--out or output.dataset)");
  }

  const mixsei::dataset::ScenarioConfig scenario =
      mixsei::config::resolved_scenario(cfg);
  const std::vector<mixsei::dataset::LabeledExample> examples =
      mixsei::dataset::synth_batch(scenario, cfg.snr_grid_db, cfg.synth_seed,
                                   cfg.synth_count);

  mixsei::dataset::DatasetManifest manifest;
  manifest.k = scenario.k;
  manifest.t = scenario.t;
  manifest.sample_rate_hz = scenario.sample_rate_hz();
  manifest.symbol_rate_hz = scenario.symbol_rate_hz;
  manifest.num_symbols = scenario.num_symbols;
  manifest.rrc = scenario.rrc;
  manifest.overlap = scenario.overlap;
  manifest.subset_policy = scenario.subset_policy;
  manifest.channel_kind = scenario.channel.kind;
  manifest.rician_k_db = scenario.channel.rician_k_db;
  manifest.snr_grid_db = cfg.snr_grid_db;
  manifest.profiles = scenario.profiles;
  manifest.seed = cfg.synth_seed;
  manifest.count = examples.size();
  manifest.version = mixsei::version();
  // Destinations are run artifacts, not generation parameters; blank them so
  // the same seed and scenario produce byte-identical files anywhere.
  mixsei::config::ExperimentConfig embedded = cfg;
  embedded.out_dataset.clear();
  embedded.out_checkpoint.clear();
  embedded.out_report.clear();
  manifest.config_json = mixsei::config::resolved_json(embedded);
  mixsei::dataset::write_dataset(cfg.out_dataset, examples, manifest);

  std::printf("wrote %s: %llu examples, K=%d, T=%d, %s/%s\n",
              cfg.out_dataset.c_str(),
              static_cast<unsigned long long>(manifest.count), manifest.k,
              manifest.t, mixsei::dataset::overlap_name(manifest.overlap),
              mixsei::dataset::channel_name(manifest.channel_kind));
  return kExitOk;
}

int cmd_train(const CommonOpts& common, const std::string& data_path,
              const std::string& arch_name, std::optional<int> epochs,
              std::optional<std::uint64_t> seed,
              const std::string& precision_name, const std::string& val_path,
              const std::string& out_ckpt, const std::string& log_path) {
  mixsei::config::ExperimentConfig cfg = load_or_default(common);
  const mixsei::dataset::Dataset data = mixsei::dataset::read_dataset(data_path);
  std::optional<mixsei::dataset::Dataset> val;
  if (!val_path.empty()) val = mixsei::dataset::read_dataset(val_path);

  mixsei::model::ArchConfig arch;
  arch.kind = mixsei::model::arch_from_name(
      arch_name.empty() ? cfg.arch : arch_name);
  arch.k = data.manifest.k;
  arch.extractor = cfg.extractor;
  arch.extractor.input_len = data.manifest.t;

  mixsei::train::TrainConfig tc = cfg.train;
  if (epochs) tc.epochs = *epochs;
  if (seed) tc.seed = *seed;
  if (!precision_name.empty()) {
    if (precision_name == "f64") {
      tc.precision = mixsei::train::Precision::F64;
    } else if (precision_name == "f32") {
      tc.precision = mixsei::train::Precision::F32;
    } else {
      throw mixsei::ConfigError("train: --precision must be f64 or f32");
    }
  }

  const mixsei::train::TrainResult result =
      mixsei::train::train(arch, data, val ? &*val : nullptr, tc);

  json meta;
  meta["command"] = "train";
  meta["data"] = data_path;
  meta["data_manifest"] = json::parse(
      mixsei::dataset::manifest_to_json(data.manifest));
  meta["arch"] = mixsei::model::arch_name(arch.kind);
  meta["epochs"] = tc.epochs;
  meta["seed"] = tc.seed;
  meta["theta"] = tc.theta;
  meta["precision"] =
      tc.precision == mixsei::train::Precision::F64 ? "f64" : "f32";
  meta["batch_size"] = tc.batch_size;
  meta["lr"] = tc.lr;
  meta["lr_step_epochs"] = tc.lr_step_epochs;
  meta["lr_gamma"] = tc.lr_gamma;
  meta["final_train"] = metrics_json(result.final_train);
  if (result.final_val) meta["final_val"] = metrics_json(*result.final_val);
  mixsei::model::save_checkpoint(out_ckpt, result.model, meta.dump());

  if (!log_path.empty()) {
    write_text_file(log_path, mixsei::train::epoch_log_csv(result.log));
  }
  std::printf("trained %s head for %d epochs on %s\n",
              mixsei::model::arch_name(arch.kind), tc.epochs, data_path.c_str());
  std::printf(
      "final train metrics: subset_acc=%.6f hamming_acc=%.6f macro_f1=%.6f n=%d\n",
      result.final_train.subset_accuracy, result.final_train.hamming_accuracy,
      result.final_train.macro_f1, result.final_train.n);
  if (result.final_val) {
    std::printf(
        "final val metrics:   subset_acc=%.6f hamming_acc=%.6f macro_f1=%.6f n=%d\n",
        result.final_val->subset_accuracy, result.final_val->hamming_accuracy,
        result.final_val->macro_f1, result.final_val->n);
  }
  std::printf("wrote checkpoint %s\n", out_ckpt.c_str());
  return kExitOk;
}

int cmd_eval(const std::string& data_path, const std::string& ckpt_path,
             double theta, const std::string& report_path) {
  const mixsei::dataset::Dataset data = mixsei::dataset::read_dataset(data_path);
  const mixsei::model::Checkpoint ckpt =
      mixsei::model::load_checkpoint(ckpt_path);
  const mixsei::metrics::SweepReport sweep =
      mixsei::metrics::sweep_report(ckpt.model, data, theta);
  if (!report_path.empty()) {
    write_text_file(report_path,
                    mixsei::metrics::sweep_csv(sweep, data.manifest, theta));
  }
  std::printf(
      "overall: subset_acc=%.6f hamming_acc=%.6f macro_f1=%.6f n=%d\n",
      sweep.overall.subset_accuracy, sweep.overall.hamming_accuracy,
      sweep.overall.macro_f1, sweep.overall.n);
  for (const auto& row : sweep.rows) {
    std::printf(
        "snr %+7.2f dB: subset_acc=%.6f hamming_acc=%.6f macro_f1=%.6f n=%d\n",
        row.snr_db, row.subset_acc, row.hamming_acc, row.macro_f1, row.n);
  }
  if (!report_path.empty()) std::printf("wrote report %s\n", report_path.c_str());
  return kExitOk;
}

int cmd_paramcount(const CommonOpts& common, int kmax) {
  mixsei::config::ExperimentConfig cfg = load_or_default(common);
  if (kmax < 2 || kmax > 16) {
    throw mixsei::ConfigError("paramcount: --kmax must lie in [2, 16]");
  }
  std::printf("%4s %16s %16s %12s\n", "K", "set-head", "subset-head", "delta");
  for (int k = 2; k <= kmax; ++k) {
    mixsei::model::ArchConfig smei;
    smei.kind = mixsei::model::ArchKind::Smei;
    smei.k = k;
    smei.extractor = cfg.extractor;
    smei.extractor.input_len = cfg.scenario.t;
    mixsei::model::ArchConfig base = smei;
    base.kind = mixsei::model::ArchKind::Baseline;
    const std::size_t ns = mixsei::model::param_count(smei);
    const std::size_t nb = mixsei::model::param_count(base);
    std::printf("%4d %16zu %16zu %12zu\n", k, ns, nb, nb - ns);
  }
  return kExitOk;
}

// Merge metric CSVs from multiple runs into one file: one schema header,
// source lines preserved as comments, data rows concatenated in input order.
int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  if (inputs.empty()) throw mixsei::ConfigError("report: no input CSV files");
  const std::string schema =
      "snr_db,arch,overlap,channel,subset_acc,hamming_acc,macro_f1,n";
  std::string merged = "# mixsei merged report, library version ";
  merged += mixsei::version();
  merged += "\n";
  std::string rows;
  for (const std::string& path : inputs) {
    const std::string text = read_text_file(path);
    merged += "# source: " + path + "\n";
    bool saw_schema = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      if (line == schema) {
        saw_schema = true;
        continue;
      }
      if (!saw_schema) {
        throw mixsei::IoError("report: " + path +
                              " does not carry the expected CSV schema header");
      }
      rows += line;
      rows += "\n";
    }
    if (!saw_schema) {
      throw mixsei::IoError("report: " + path +
                            " does not carry the expected CSV schema header");
    }
  }
  merged += schema + "\n" + rows;
  write_text_file(out, merged);
  std::printf("wrote merged report %s (%zu inputs)\n", out.c_str(), inputs.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapped-emitter signal workbench: synthesize labeled "
               "mixtures, train set-valued identifiers, report metrics."};
  app.set_version_flag("--version", std::string(mixsei::version()));
  app.require_subcommand(1);

  CommonOpts common;

  auto* synth = app.add_subcommand("synth", "Generate a labeled dataset file");
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::uint64_t> synth_count;
  std::string synth_out;
  synth->add_option("--config", common.config_path, "Config file (TOML or JSON)");
  synth->add_option("--seed", synth_seed, "Dataset seed (overrides config)");
  synth->add_option("--count", synth_count, "Example count (overrides config)");
  synth->add_option("--out", synth_out, "Output dataset path");

  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  std::string train_data, train_arch, train_precision, train_val, train_out,
      train_log;
  std::optional<int> train_epochs;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--config", common.config_path, "Config file (TOML or JSON)");
  train->add_option("--data", train_data, "Training dataset")->required();
  train->add_option("--arch", train_arch, "Head type: smei | baseline");
  train->add_option("--epochs", train_epochs, "Epoch count (overrides config)");
  train->add_option("--seed", train_seed, "Training seed (overrides config)");
  train->add_option("--precision", train_precision, "f64 (default) or f32");
  train->add_option("--val", train_val, "Validation dataset (optional)");
  train->add_option("--out", train_out, "Output checkpoint path")->required();
  train->add_option("--log", train_log, "Write per-epoch CSV log here");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string eval_data, eval_ckpt, eval_report;
  double eval_theta = 0.5;
  eval->add_option("--data", eval_data, "Dataset to evaluate on")->required();
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--theta", eval_theta, "Decision threshold in (0,1)");
  eval->add_option("--report", eval_report, "Write per-SNR CSV report here");

  auto* paramcount =
      app.add_subcommand("paramcount", "Print parameter-count table over K");
  int kmax = 6;
  paramcount->add_option("--config", common.config_path,
                         "Config file (TOML or JSON)");
  paramcount->add_option("--kmax", kmax, "Largest emitter count in the table");

  auto* report = app.add_subcommand("report", "Merge metric CSVs across runs");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("--out", report_out, "Merged CSV path")->required();
  report->add_option("inputs", report_inputs, "Input CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(common, synth_seed, synth_count, synth_out);
    }
    if (train->parsed()) {
      return cmd_train(common, train_data, train_arch, train_epochs, train_seed,
                       train_precision, train_val, train_out, train_log);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_data, eval_ckpt, eval_theta, eval_report);
    }
    if (paramcount->parsed()) return cmd_paramcount(common, kmax);
    if (report->parsed()) return cmd_report(report_inputs, report_out);
  } catch (const mixsei::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const mixsei::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const mixsei::ShapeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitShape;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
