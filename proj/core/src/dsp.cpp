#include "mixsei/dsp.hpp"

#include <cmath>
#include <stdexcept>

namespace mixsei::dsp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// RRC impulse response at time t in symbol periods (Ts = 1).
double rrc_impulse(double t, double alpha) {
  if (t == 0.0) return 1.0 - alpha + 4.0 * alpha / kPi;
  const double quarter = 1.0 / (4.0 * alpha);
  if (std::abs(std::abs(t) - quarter) < 1e-12) {
    const double s = std::sin(kPi * quarter);
    const double c = std::cos(kPi * quarter);
    return (alpha / std::sqrt(2.0)) *
           ((1.0 + 2.0 / kPi) * s + (1.0 - 2.0 / kPi) * c);
  }
  const double num =
      std::sin(kPi * t * (1.0 - alpha)) + 4.0 * alpha * t * std::cos(kPi * t * (1.0 + alpha));
  const double four_at = 4.0 * alpha * t;
  const double den = kPi * t * (1.0 - four_at * four_at);
  return num / den;
}

}  // namespace

std::vector<cplx> map_qpsk(const std::vector<std::uint8_t>& bits) {
  if (bits.size() % 2 != 0)
    throw std::invalid_argument("map_qpsk: bit count must be even");
  std::vector<cplx> symbols;
  symbols.reserve(bits.size() / 2);
  for (std::size_t i = 0; i < bits.size(); i += 2) {
    const std::uint8_t b1 = bits[i];
    const std::uint8_t b0 = bits[i + 1];
    if (b1 > 1 || b0 > 1)
      throw std::invalid_argument("map_qpsk: bits must be 0 or 1");
    symbols.emplace_back(b1 ? -kInvSqrt2 : kInvSqrt2,
                         b0 ? -kInvSqrt2 : kInvSqrt2);
  }
  return symbols;
}

std::vector<double> rrc_taps(const RrcSpec& spec) {
  if (!(spec.rolloff > 0.0) || spec.rolloff > 1.0)
    throw std::invalid_argument("rrc_taps: rolloff must be in (0, 1]");
  if (spec.span_symbols <= 0 || spec.sps <= 0)
    throw std::invalid_argument("rrc_taps: span_symbols and sps must be positive");

  const int n = spec.tap_count();
  const int mid = n / 2;
  std::vector<double> taps(n);
  // Mirror one half so the symmetry is exact in floating point.
  for (int i = 0; i <= mid; ++i) {
    const double t = static_cast<double>(i - mid) / spec.sps;
    taps[i] = rrc_impulse(t, spec.rolloff);
    taps[n - 1 - i] = taps[i];
  }
  double energy = 0.0;
  for (double h : taps) energy += h * h;
  const double scale = 1.0 / std::sqrt(energy);
  for (double& h : taps) h *= scale;
  return taps;
}

IqBuffer pulse_shape(const std::vector<cplx>& symbols, const RrcSpec& spec,
                     double symbol_rate_hz) {
  if (symbols.empty()) throw std::invalid_argument("pulse_shape: empty symbols");
  if (!(symbol_rate_hz > 0.0))
    throw std::invalid_argument("pulse_shape: symbol_rate_hz must be positive");

  const std::vector<double> taps = rrc_taps(spec);
  const std::size_t up_len = symbols.size() * static_cast<std::size_t>(spec.sps);
  const std::size_t out_len = up_len + taps.size() - 1;

  IqBuffer out;
  out.sample_rate_hz = symbol_rate_hz * spec.sps;
  out.samples.assign(out_len, cplx{0.0, 0.0});
  // Full convolution of the zero-stuffed stream; only symbol positions
  // contribute, so iterate over symbols directly.
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const std::size_t base = s * static_cast<std::size_t>(spec.sps);
    const cplx sym = symbols[s];
    for (std::size_t j = 0; j < taps.size(); ++j) {
      out.samples[base + j] += sym * taps[j];
    }
  }
  return out;
}

}  // namespace mixsei::dsp
