#include "mixsei/impairment.hpp"

#include <cmath>
#include <stdexcept>

namespace mixsei::impairment {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// e^{j 2 pi (f/fs) n} with the phase reduced mod 1 before the trig calls,
// so accuracy does not degrade over long buffers.
cplx tone(double cycles_per_sample, std::size_t n) {
  const double turns = std::fmod(cycles_per_sample * static_cast<double>(n), 1.0);
  const double ph = kTwoPi * turns;
  return {std::cos(ph), std::sin(ph)};
}

}  // namespace

void EmitterProfile::validate() const {
  if (!(gain_imbalance > 0.0) || !std::isfinite(gain_imbalance))
    throw std::invalid_argument("EmitterProfile: gain_imbalance must be finite and > 0");
  if (!std::isfinite(phase_bias_rad))
    throw std::invalid_argument("EmitterProfile: phase_bias_rad must be finite");
  if (!(spur_amplitude >= 0.0) || !std::isfinite(spur_amplitude))
    throw std::invalid_argument("EmitterProfile: spur_amplitude must be finite and >= 0");
  if (!std::isfinite(spur_offset_hz))
    throw std::invalid_argument("EmitterProfile: spur_offset_hz must be finite");
  if (!(leakage_amplitude >= 0.0) || !std::isfinite(leakage_amplitude))
    throw std::invalid_argument("EmitterProfile: leakage_amplitude must be finite and >= 0");
  if (pa_coeffs.empty())
    throw std::invalid_argument("EmitterProfile: pa_coeffs must be nonempty");
  for (const cplx& b : pa_coeffs) {
    if (!std::isfinite(b.real()) || !std::isfinite(b.imag()))
      throw std::invalid_argument("EmitterProfile: non-finite pa coefficient");
  }
  if (!std::isfinite(if_offset_hz))
    throw std::invalid_argument("EmitterProfile: if_offset_hz must be finite");
}

IqBuffer iq_imbalance(const IqBuffer& x, double gain, double phase_rad) {
  if (!(gain > 0.0) || !std::isfinite(gain))
    throw std::invalid_argument("iq_imbalance: gain must be finite and > 0");
  if (!std::isfinite(phase_rad))
    throw std::invalid_argument("iq_imbalance: phase must be finite");

  const double c = std::cos(phase_rad / 2.0);
  const double s = std::sin(phase_rad / 2.0);
  const cplx mu{0.5 * (gain + 1.0) * c, 0.5 * (gain - 1.0) * s};
  const cplx nu{0.5 * (gain - 1.0) * c, 0.5 * (gain + 1.0) * s};

  IqBuffer out;
  out.sample_rate_hz = x.sample_rate_hz;
  out.samples.reserve(x.samples.size());
  for (const cplx& v : x.samples) out.samples.push_back(mu * v + nu * std::conj(v));
  return out;
}

IqBuffer upconvert_with_spur_leak(const IqBuffer& x, const EmitterProfile& p) {
  p.validate();
  const double fs = x.sample_rate_hz;
  if (!(fs > 2.0 * (std::abs(p.if_offset_hz) + std::abs(p.spur_offset_hz))))
    throw std::invalid_argument(
        "upconvert_with_spur_leak: sample rate must exceed 2*(|if_offset| + |spur_offset|)");

  const double if_cps = p.if_offset_hz / fs;
  const double spur_cps = (p.if_offset_hz + p.spur_offset_hz) / fs;

  IqBuffer out;
  out.sample_rate_hz = fs;
  out.samples.resize(x.samples.size());
  for (std::size_t n = 0; n < x.samples.size(); ++n) {
    const cplx carrier = tone(if_cps, n);
    out.samples[n] = x.samples[n] * carrier + p.spur_amplitude * tone(spur_cps, n) +
                     p.leakage_amplitude * carrier;
  }
  return out;
}

IqBuffer pa_nonlinearity(const IqBuffer& x, const std::vector<cplx>& coeffs) {
  if (coeffs.empty())
    throw std::invalid_argument("pa_nonlinearity: empty coefficient list");

  IqBuffer out;
  out.sample_rate_hz = x.sample_rate_hz;
  out.samples.resize(x.samples.size());
  for (std::size_t n = 0; n < x.samples.size(); ++n) {
    const cplx v = x.samples[n];
    // Horner over sum_{l=1..L} b_l v^l = v*(b_1 + v*(b_2 + ...)).
    cplx acc = coeffs.back();
    for (std::size_t l = coeffs.size() - 1; l-- > 0;) acc = acc * v + coeffs[l];
    out.samples[n] = acc * v;
  }
  return out;
}

IqBuffer distort(const IqBuffer& x, const EmitterProfile& p) {
  p.validate();
  return pa_nonlinearity(
      upconvert_with_spur_leak(iq_imbalance(x, p.gain_imbalance, p.phase_bias_rad), p),
      p.pa_coeffs);
}

}  // namespace mixsei::impairment
