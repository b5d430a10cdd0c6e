#pragma once

#include <cstdint>
#include <vector>

#include "mixsei/iq.hpp"

namespace mixsei::dsp {

// Root-raised-cosine filter design parameters.
struct RrcSpec {
  double rolloff = 0.3;   // alpha in (0, 1]
  int span_symbols = 10;  // filter length in symbol periods
  int sps = 6;            // samples per symbol

  // Always odd, so the filter is symmetric about a center tap.
  int tap_count() const { return span_symbols * sps + 1; }
};

// Gray-coded unit-energy QPSK map over bit pairs (b1, b0):
//   00 -> (+1+j)/sqrt2   01 -> (+1-j)/sqrt2
//   10 -> (-1+j)/sqrt2   11 -> (-1-j)/sqrt2
// Bits are consumed two at a time, b1 first. Odd bit counts and values
// outside {0,1} are rejected.
std::vector<cplx> map_qpsk(const std::vector<std::uint8_t>& bits);

// RRC impulse response, symmetric, normalized to unit energy (sum h^2 = 1).
// The singular points t = 0 and t = +-Ts/(4 alpha) use their analytic limits.
std::vector<double> rrc_taps(const RrcSpec& spec);

// Zero-stuff the symbol stream by spec.sps and run the full convolution
// with the RRC taps. Output length = sps * Nsym + taps - 1, at sample rate
// sps * symbol_rate.
IqBuffer pulse_shape(const std::vector<cplx>& symbols, const RrcSpec& spec,
                     double symbol_rate_hz);

}  // namespace mixsei::dsp
