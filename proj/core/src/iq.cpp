#include "mixsei/iq.hpp"

#include <cmath>
#include <stdexcept>

namespace mixsei {

bool all_finite(const IqBuffer& x) {
  for (const cplx& s : x.samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) return false;
  }
  return true;
}

void validate(const IqBuffer& x) {
  if (x.samples.empty()) throw std::invalid_argument("IqBuffer: empty");
  if (!(x.sample_rate_hz > 0.0))
    throw std::invalid_argument("IqBuffer: sample_rate_hz must be positive");
  if (!all_finite(x)) throw std::invalid_argument("IqBuffer: non-finite sample");
}

double mean_power(const IqBuffer& x) {
  if (x.samples.empty()) return 0.0;
  double acc = 0.0;
  for (const cplx& s : x.samples) acc += std::norm(s);
  return acc / static_cast<double>(x.samples.size());
}

}  // namespace mixsei
