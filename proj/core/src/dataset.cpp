#include "mixsei/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mixsei/detail/threadpool.hpp"
#include "mixsei/errors.hpp"

namespace mixsei::dataset {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

int LabelVector::active_count() const {
  int c = 0;
  for (std::uint8_t b : bits) c += b ? 1 : 0;
  return c;
}

std::uint32_t LabelVector::mask() const {
  std::uint32_t m = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) m |= 1u << i;
  return m;
}

LabelVector LabelVector::from_mask(std::uint32_t mask, int k) {
  LabelVector v;
  v.bits.resize(k);
  for (int i = 0; i < k; ++i) v.bits[i] = (mask >> i) & 1u;
  return v;
}

void ScenarioConfig::validate() const {
  if (k < 2) throw ConfigError("scenario.k: must be >= 2");
  if (t <= 0) throw ConfigError("scenario.t: must be positive");
  if (num_symbols <= 0) throw ConfigError("scenario.num_symbols: must be positive");
  if (!(symbol_rate_hz > 0.0))
    throw ConfigError("scenario.symbol_rate_hz: must be positive");
  if (!(rrc.rolloff > 0.0) || rrc.rolloff > 1.0)
    throw ConfigError("scenario.rrc_rolloff: must be in (0, 1]");
  if (rrc.span_symbols <= 0) throw ConfigError("scenario.rrc_span: must be positive");
  if (rrc.sps <= 0) throw ConfigError("scenario.sps: must be positive");
  try {
    channel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario.channel: ") + e.what());
  }
  // The window plus both transient skirts must fit into one burst.
  const int burst = num_symbols * rrc.sps + rrc.tap_count() - 1;
  const int needed = t + 2 * rrc.span_symbols * rrc.sps;
  if (burst < needed)
    throw ConfigError("scenario.num_symbols: burst too short for steady-state window (need " +
                      std::to_string(needed) + " samples, burst is " +
                      std::to_string(burst) + ")");
  if (overlap == Overlap::Half && sample_rate_hz() < k * 13e6)
    throw ConfigError("scenario.overlap: half overlap needs sample rate >= K*13 MHz");
  if (!profiles.empty() && static_cast<int>(profiles.size()) != k)
    throw ConfigError("scenario.profiles: must have exactly K entries");
}

LabelVector sample_active_set(int k, SubsetPolicy policy, RngStream& rng) {
  if (k < 1) throw std::invalid_argument("sample_active_set: k must be >= 1");
  if (k > 30) throw std::invalid_argument("sample_active_set: k too large");

  std::uint32_t mask = 0;
  if (policy == SubsetPolicy::UniformSubsets) {
    const std::uint64_t subsets = (1ull << k) - 1;
    mask = static_cast<std::uint32_t>(1 + rng.uniform_int(subsets));
  } else {
    const int card = 1 + static_cast<int>(rng.uniform_int(k));
    // Partial Fisher-Yates over emitter indices; first `card` are active.
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < card; ++i) {
      const int j = i + static_cast<int>(rng.uniform_int(k - i));
      std::swap(idx[i], idx[j]);
      mask |= 1u << idx[i];
    }
  }
  return LabelVector::from_mask(mask, k);
}

std::vector<double> if_offsets(int k, Overlap overlap) {
  if (k < 1) throw std::invalid_argument("if_offsets: k must be >= 1");
  std::vector<double> offsets(k, 0.0);
  if (overlap == Overlap::Half) {
    for (int m = 1; m <= k; ++m)
      offsets[m - 1] = (m - 0.5 * (k + 1)) * 13e6;
  }
  return offsets;
}

IqBuffer steady_window(const IqBuffer& x, const dsp::RrcSpec& spec, int t,
                       RngStream& rng) {
  if (t <= 0) throw std::invalid_argument("steady_window: t must be positive");
  const std::size_t guard = static_cast<std::size_t>(spec.span_symbols) * spec.sps;
  const std::size_t needed = static_cast<std::size_t>(t) + 2 * guard;
  if (x.samples.size() < needed)
    throw std::invalid_argument("steady_window: buffer too short, need at least " +
                                std::to_string(needed) + " samples, got " +
                                std::to_string(x.samples.size()));
  const std::size_t slots = x.samples.size() - needed + 1;
  const std::size_t start = guard + rng.uniform_int(slots);

  IqBuffer out;
  out.sample_rate_hz = x.sample_rate_hz;
  out.samples.assign(x.samples.begin() + start, x.samples.begin() + start + t);
  return out;
}

std::vector<impairment::EmitterProfile> draw_profiles(int k, Overlap overlap,
                                                      RngStream& rng) {
  const std::vector<double> offsets = if_offsets(k, overlap);
  std::vector<impairment::EmitterProfile> profiles(k);
  for (int m = 0; m < k; ++m) {
    impairment::EmitterProfile& p = profiles[m];
    p.gain_imbalance = rng.uniform(0.9, 1.1);
    p.phase_bias_rad = rng.uniform(-5.0, 5.0) * kDegToRad;
    p.spur_amplitude = rng.uniform(0.01, 0.05);
    p.spur_offset_hz = rng.uniform(1e6, 5e6);
    p.leakage_amplitude = rng.uniform(0.01, 0.05);
    p.pa_coeffs = {cplx{1.0, 0.0}, cplx{0.0, 0.0}, cplx{rng.uniform(-0.05, -0.01), 0.0}};
    p.if_offset_hz = offsets[m];
  }
  return profiles;
}

LabeledExample synth_example(const ScenarioConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (cfg.profiles.empty())
    throw std::invalid_argument("synth_example: scenario has no emitter profiles");

  const LabelVector label = sample_active_set(cfg.k, cfg.subset_policy, rng);

  // Fixed draw order: bits per active emitter (ascending), fading
  // coefficients (ascending), noise, then the window offset.
  std::vector<IqBuffer> emissions;
  for (int m = 0; m < cfg.k; ++m) {
    if (!label.bits[m]) continue;
    std::vector<std::uint8_t> bits(2 * static_cast<std::size_t>(cfg.num_symbols));
    for (std::uint8_t& b : bits) b = static_cast<std::uint8_t>(rng.bit());
    IqBuffer shaped = dsp::pulse_shape(dsp::map_qpsk(bits), cfg.rrc, cfg.symbol_rate_hz);
    emissions.push_back(impairment::distort(shaped, cfg.profiles[m]));
  }

  std::vector<cplx> coeffs(emissions.size(), cplx{1.0, 0.0});
  if (cfg.channel.kind == channel::ChannelKind::Rician) {
    for (cplx& h : coeffs) h = channel::rician_coeff(cfg.channel.rician_k_db, rng);
  }

  const IqBuffer mixed = channel::mix(emissions, coeffs, cfg.channel, rng);
  const IqBuffer win = steady_window(mixed, cfg.rrc, cfg.t, rng);

  double power = mean_power(win);
  const double scale = power > 0.0 ? 1.0 / std::sqrt(power) : 1.0;

  LabeledExample ex;
  ex.label_mask = label.mask();
  ex.snr_db = static_cast<float>(cfg.channel.snr_db);
  ex.window.resize(2 * static_cast<std::size_t>(cfg.t));
  for (int i = 0; i < cfg.t; ++i) {
    ex.window[i] = static_cast<float>(win.samples[i].real() * scale);
    ex.window[cfg.t + i] = static_cast<float>(win.samples[i].imag() * scale);
  }
  return ex;
}

std::vector<LabeledExample> synth_batch(const ScenarioConfig& cfg,
                                        const std::vector<double>& snr_grid_db,
                                        std::uint64_t seed, std::uint64_t count,
                                        std::uint64_t first_stream) {
  if (snr_grid_db.empty())
    throw std::invalid_argument("synth_batch: empty SNR grid");
  cfg.validate();

  std::vector<LabeledExample> examples(count);
  detail::parallel_for(count, [&](std::size_t i) {
    ScenarioConfig local = cfg;
    local.channel.snr_db = snr_grid_db[i % snr_grid_db.size()];
    RngStream rng(seed, first_stream + i);
    examples[i] = synth_example(local, rng);
  });
  return examples;
}

const char* overlap_name(Overlap o) {
  return o == Overlap::Full ? "full" : "half";
}

const char* policy_name(SubsetPolicy p) {
  return p == SubsetPolicy::UniformSubsets ? "uniform_subsets" : "uniform_cardinality";
}

const char* channel_name(channel::ChannelKind k) {
  return k == channel::ChannelKind::Awgn ? "awgn" : "rician";
}

}  // namespace mixsei::dataset
