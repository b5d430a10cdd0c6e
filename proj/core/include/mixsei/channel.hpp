#pragma once

#include <vector>

#include "mixsei/iq.hpp"
#include "mixsei/rng.hpp"

namespace mixsei::channel {

enum class ChannelKind { Awgn, Rician };

struct ChannelConfig {
  ChannelKind kind = ChannelKind::Awgn;
  double rician_k_db = 10.0;  // K-factor, used iff kind == Rician
  // Mixture-referenced SNR. +infinity disables noise entirely.
  double snr_db = 10.0;

  bool noiseless() const;
  void validate() const;
};

// One flat fading draw: h = sqrt(K/(K+1)) + sqrt(1/(2(K+1))) (n1 + j n2),
// K = 10^(k_db/10). E[|h|^2] = 1. Block-constant per example.
cplx rician_coeff(double k_db, RngStream& rng);

// s[n] = sum_m h_m signal_m[n]; AWGN forces every h_m = 1. Complex white
// Gaussian noise is added at sigma^2 = P_s / 10^(snr_db/10) with P_s the
// empirical mean power of the noiseless mixture (variance sigma^2/2 per
// component). All buffers must share length and sample rate.
IqBuffer mix(const std::vector<IqBuffer>& signals, const std::vector<cplx>& coeffs,
             const ChannelConfig& config, RngStream& rng);

}  // namespace mixsei::channel
