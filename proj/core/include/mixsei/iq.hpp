#pragma once

#include <complex>
#include <vector>

namespace mixsei {

using cplx = std::complex<double>;

// Finite complex baseband waveform plus its sample rate. The universal
// signal currency between synthesis stages.
struct IqBuffer {
  std::vector<cplx> samples;
  double sample_rate_hz = 0.0;

  std::size_t size() const { return samples.size(); }
};

// True when every sample is finite (no NaN/Inf in either component).
bool all_finite(const IqBuffer& x);

// Throws std::invalid_argument when the buffer is empty, the rate is not
// positive, or any sample is non-finite.
void validate(const IqBuffer& x);

// Mean of |x[n]|^2.
double mean_power(const IqBuffer& x);

}  // namespace mixsei
