#include "mixsei/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace mixsei::channel {

bool ChannelConfig::noiseless() const {
  return std::isinf(snr_db) && snr_db > 0.0;
}

void ChannelConfig::validate() const {
  if (std::isnan(snr_db) || (std::isinf(snr_db) && snr_db < 0.0))
    throw std::invalid_argument("ChannelConfig: snr_db must be finite or +inf");
  if (kind == ChannelKind::Rician && !std::isfinite(rician_k_db))
    throw std::invalid_argument("ChannelConfig: rician_k_db must be finite");
}

cplx rician_coeff(double k_db, RngStream& rng) {
  const double k = std::pow(10.0, k_db / 10.0);
  const double los = std::sqrt(k / (k + 1.0));
  const double scatter = std::sqrt(1.0 / (2.0 * (k + 1.0)));
  const double n1 = rng.normal();
  const double n2 = rng.normal();
  return {los + scatter * n1, scatter * n2};
}

IqBuffer mix(const std::vector<IqBuffer>& signals, const std::vector<cplx>& coeffs,
             const ChannelConfig& config, RngStream& rng) {
  config.validate();
  if (signals.empty()) throw std::invalid_argument("mix: empty signal list");
  if (signals.size() != coeffs.size())
    throw std::invalid_argument("mix: signals and coeffs must have equal length");
  const std::size_t n = signals.front().samples.size();
  const double fs = signals.front().sample_rate_hz;
  for (const IqBuffer& s : signals) {
    if (s.samples.size() != n)
      throw std::invalid_argument("mix: signal length mismatch");
    if (s.sample_rate_hz != fs)
      throw std::invalid_argument("mix: sample rate mismatch");
  }

  IqBuffer out;
  out.sample_rate_hz = fs;
  out.samples.assign(n, cplx{0.0, 0.0});
  for (std::size_t m = 0; m < signals.size(); ++m) {
    const cplx h = (config.kind == ChannelKind::Awgn) ? cplx{1.0, 0.0} : coeffs[m];
    const std::vector<cplx>& src = signals[m].samples;
    for (std::size_t i = 0; i < n; ++i) out.samples[i] += h * src[i];
  }

  if (!config.noiseless()) {
    double p_s = 0.0;
    for (const cplx& v : out.samples) p_s += std::norm(v);
    p_s /= static_cast<double>(n);
    const double sigma2 = p_s / std::pow(10.0, config.snr_db / 10.0);
    const double comp_std = std::sqrt(sigma2 / 2.0);
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] += cplx{comp_std * rng.normal(), comp_std * rng.normal()};
    }
  }
  return out;
}

}  // namespace mixsei::channel
