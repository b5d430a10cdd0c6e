#pragma once

#include <vector>

#include "mixsei/iq.hpp"

namespace mixsei::impairment {

// Fixed hardware signature of one emitter. Default-constructed values form
// the neutral profile (distort == identity).
struct EmitterProfile {
  double gain_imbalance = 1.0;    // G, modulator gain mismatch, > 0
  double phase_bias_rad = 0.0;    // zeta, modulator phase mismatch
  double spur_amplitude = 0.0;    // a_ST >= 0
  double spur_offset_hz = 0.0;    // f_ST, spur offset from the IF
  double leakage_amplitude = 0.0; // a_CL >= 0, residual carrier tone
  std::vector<cplx> pa_coeffs{cplx{1.0, 0.0}};  // b_1..b_L
  double if_offset_hz = 0.0;      // f, digital IF standing in for the carrier

  // All finite, G > 0, amplitudes >= 0, pa_coeffs nonempty.
  void validate() const;
};

// Modulator I/Q imbalance: out[n] = mu * x[n] + nu * conj(x[n]) with
//   mu = (G+1)/2 cos(z/2) + j (G-1)/2 sin(z/2)
//   nu = (G-1)/2 cos(z/2) + j (G+1)/2 sin(z/2)
IqBuffer iq_imbalance(const IqBuffer& x, double gain, double phase_rad);

// Digital IF shift plus additive spurious tone and carrier leakage:
//   out[n] = x[n] e^{j2pi f t_n} + a_ST e^{j2pi (f+f_ST) t_n} + a_CL e^{j2pi f t_n}
// with t_n = n / sample_rate. Requires sample_rate > 2(|f| + |f_ST|).
IqBuffer upconvert_with_spur_leak(const IqBuffer& x, const EmitterProfile& p);

// Memoryless PA polynomial: out[n] = sum_{l=1..L} b_l x[n]^l, complex powers.
IqBuffer pa_nonlinearity(const IqBuffer& x, const std::vector<cplx>& coeffs);

// Full distortion chain: I/Q imbalance -> IF/spur/leakage -> PA.
// Length-preserving at every stage.
IqBuffer distort(const IqBuffer& x, const EmitterProfile& p);

}  // namespace mixsei::impairment
