#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixsei/dataset.hpp"
#include "mixsei/model.hpp"
#include "mixsei/train.hpp"

namespace mixsei::config {

// One experiment, fully described: what to synthesize, how to train on it,
// where outputs go. Serialized back into every artifact so runs are
// self-describing.
struct ExperimentConfig {
  dataset::ScenarioConfig scenario;  // profiles stay empty until resolved
  std::vector<double> snr_grid_db = {-3, 0, 3, 6, 9, 12, 15, 18};
  std::uint64_t profile_seed = 1;
  std::uint64_t synth_seed = 0;
  std::uint64_t synth_count = 0;
  std::string arch = "smei";
  model::ExtractorConfig extractor;  // input_len mirrors scenario.t
  train::TrainConfig train;
  std::string out_dataset;
  std::string out_checkpoint;
  std::string out_report;

  void validate() const;  // throws ConfigError naming the offending field
};

ExperimentConfig default_config();

// Accepts a TOML subset (sections, dotted sections, scalars, one-line
// arrays, comments) or JSON (sniffed by a leading '{'). Unknown keys are
// rejected so typos fail loudly. origin labels error messages.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin);
ExperimentConfig load_config(const std::string& path);

// Canonical JSON serialization of the full resolved config (deterministic
// key order, infinities as strings).
std::string resolved_json(const ExperimentConfig& cfg);

// Scenario with emitter profiles drawn from profile_seed.
dataset::ScenarioConfig resolved_scenario(const ExperimentConfig& cfg);
// Architecture for this experiment (head from scenario.k, input from
// scenario.t). arch_override empty means cfg.arch.
model::ArchConfig resolved_arch(const ExperimentConfig& cfg,
                                const std::string& arch_override = "");

}  // namespace mixsei::config
