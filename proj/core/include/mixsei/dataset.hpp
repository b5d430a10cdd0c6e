#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixsei/channel.hpp"
#include "mixsei/dsp.hpp"
#include "mixsei/impairment.hpp"
#include "mixsei/iq.hpp"
#include "mixsei/rng.hpp"

namespace mixsei::dataset {

// Activity indicator per emitter; bit m-1 of mask() is emitter m.
struct LabelVector {
  std::vector<std::uint8_t> bits;  // K entries in {0,1}

  int k() const { return static_cast<int>(bits.size()); }
  int active_count() const;
  std::uint32_t mask() const;
  static LabelVector from_mask(std::uint32_t mask, int k);

  bool operator==(const LabelVector& other) const = default;
};

enum class Overlap { Full, Half };
enum class SubsetPolicy { UniformSubsets, UniformCardinality };

// One synthesis scenario: emitter fleet, spectrum plan, channel, windowing.
struct ScenarioConfig {
  int k = 3;
  Overlap overlap = Overlap::Full;
  int t = 1024;                    // window length in samples
  int num_symbols = 256;           // QPSK symbols per burst
  double symbol_rate_hz = 20e6;
  dsp::RrcSpec rrc{0.3, 10, 6};
  channel::ChannelConfig channel;
  std::vector<impairment::EmitterProfile> profiles;  // one per emitter
  SubsetPolicy subset_policy = SubsetPolicy::UniformSubsets;

  double sample_rate_hz() const { return symbol_rate_hz * rrc.sps; }
  // Throws ConfigError naming the offending field.
  void validate() const;
};

// One received window split into real/imag rows (row-major 2 x T), with
// its activity label and the SNR it was generated at.
struct LabeledExample {
  std::vector<float> window;  // 2*T floats: real row, then imaginary row
  std::uint32_t label_mask = 0;
  float snr_db = 0.0f;

  int t() const { return static_cast<int>(window.size() / 2); }
  LabelVector label(int k) const { return LabelVector::from_mask(label_mask, k); }
};

// Everything needed to regenerate or interpret a dataset file.
struct DatasetManifest {
  int k = 0;
  int t = 0;
  double sample_rate_hz = 0.0;
  double symbol_rate_hz = 0.0;
  int num_symbols = 0;
  dsp::RrcSpec rrc{};
  Overlap overlap = Overlap::Full;
  SubsetPolicy subset_policy = SubsetPolicy::UniformSubsets;
  channel::ChannelKind channel_kind = channel::ChannelKind::Awgn;
  double rician_k_db = 10.0;
  std::vector<double> snr_grid_db;  // per-example SNR cycles through this grid
  std::vector<impairment::EmitterProfile> profiles;
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  std::string version;      // library version that wrote the file
  std::string config_json;  // full resolved experiment config, if any
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<LabeledExample> examples;
};

// Uniform draw of a non-empty active set.
//   UniformSubsets:    each of the 2^K - 1 non-empty subsets equiprobable.
//   UniformCardinality: |S| uniform on [1,K], then a uniform |S|-subset.
LabelVector sample_active_set(int k, SubsetPolicy policy, RngStream& rng);

// Digital IF plan. Full overlap: all co-channel at 0 Hz. Half overlap:
// 13 MHz spacing centered on 0, i.e. (m - (K+1)/2) * 13 MHz for m = 1..K.
std::vector<double> if_offsets(int k, Overlap overlap);

// Drop span*sps samples of filter transient at each end and return T
// contiguous samples starting at a uniformly drawn interior offset.
IqBuffer steady_window(const IqBuffer& x, const dsp::RrcSpec& spec, int t,
                       RngStream& rng);

// Draw one emitter fleet: impairment parameters per device, IF offsets per
// the overlap plan. Values are frozen into the manifest afterwards.
std::vector<impairment::EmitterProfile> draw_profiles(int k, Overlap overlap,
                                                      RngStream& rng);

// Full pipeline for one example: active set -> per-emitter random QPSK
// bursts -> distortion -> channel mixing -> steady-state window -> unit
// average power -> 2 x T split.
LabeledExample synth_example(const ScenarioConfig& cfg, RngStream& rng);

// Stream ids within a dataset seed: example i uses stream i; the profile
// draw uses a reserved stream far outside any example range.
inline constexpr std::uint64_t kProfileStreamId = 0xffff'ffff'0000'0001ull;

// Generate `count` examples with per-example streams (seed, first_stream + i).
// SNR cycles round-robin through manifest-style snr_grid_db. Examples are
// produced in parallel; the result is identical for any worker count.
std::vector<LabeledExample> synth_batch(const ScenarioConfig& cfg,
                                        const std::vector<double>& snr_grid_db,
                                        std::uint64_t seed, std::uint64_t count,
                                        std::uint64_t first_stream = 0);

// Bit-exact dataset file ("SMEI" format; see the README for the layout).
void write_dataset(const std::string& path, const std::vector<LabeledExample>& examples,
                   const DatasetManifest& manifest);
Dataset read_dataset(const std::string& path);

// Manifest <-> JSON (used for the file header and for embedding in reports).
std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);

// Scenario reconstructed from a manifest (profiles included), with the
// channel SNR left at the first grid entry.
ScenarioConfig scenario_from_manifest(const DatasetManifest& m);

const char* overlap_name(Overlap o);
const char* policy_name(SubsetPolicy p);
const char* channel_name(channel::ChannelKind k);

}  // namespace mixsei::dataset
