#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixsei/dataset.hpp"
#include "mixsei/detail/net.hpp"

namespace mixsei::model {

enum class ArchKind { Smei, Baseline };

const char* arch_name(ArchKind kind);
ArchKind arch_from_name(const std::string& name);

// Residual extractor hyperparameters. Channel counts are the full-width
// plan; width_mult thins them uniformly for desk-scale runs (head
// arithmetic that quotes 257-per-emitter growth requires width_mult = 1).
struct ExtractorConfig {
  int input_len = 1024;
  int stem_channels = 32;
  std::vector<int> stage_channels = {64, 128, 256};
  int stem_kernel = 7;
  int block_kernel = 3;
  double width_mult = 1.0;
};

struct ArchConfig {
  ArchKind kind = ArchKind::Smei;
  int k = 3;
  ExtractorConfig extractor;

  int feature_dim() const;
  // Sigmoid head outputs K scores; softmax head covers the 2^K - 1
  // non-empty subsets.
  int head_out() const;
  void validate() const;
};

int scaled_channels(int channels, double width_mult);

// Fully resolved layer plan (channels scaled, head sized) for the network
// engine; validates the configuration.
nn::detail::NetPlan net_plan(const ArchConfig& arch);

std::size_t param_count(const ArchConfig& arch);

struct LayerParam {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t count = 0;
};

// Canonical flat parameter order: stem, stages (conv1, conv2, projection
// when present), head; weights before biases.
std::vector<LayerParam> param_layout(const ArchConfig& arch);

struct Model {
  ArchConfig arch;
  std::vector<double> params;
};

// He-normal weights, zero biases, deterministic in the seed.
Model init_model(const ArchConfig& arch, std::uint64_t seed);

// windows: batch contiguous examples of 2*input_len float32 values
// (real row then imaginary row). Returns [batch, head_out] row-major.
std::vector<double> forward_logits(const Model& model, const float* windows,
                                   int batch);
// Sigmoid per label for the multi-label head, softmax over subsets for the
// baseline head.
std::vector<double> forward_probs(const Model& model, const float* windows,
                                  int batch);

// Strict-threshold decision: emitter m is active iff probs[m] > theta.
// theta must lie strictly inside (0, 1).
dataset::LabelVector decide_set(const std::vector<double>& probs, double theta);

// Baseline label codec: non-empty subset bitmask <-> class index (mask - 1).
int subset_to_class(const dataset::LabelVector& label);
dataset::LabelVector class_to_subset(int cls, int k);

}  // namespace mixsei::model
