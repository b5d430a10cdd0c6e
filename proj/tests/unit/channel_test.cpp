#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "mixsei/channel.hpp"
#include "mixsei/rng.hpp"

using mixsei::IqBuffer;
using mixsei::cplx;
using mixsei::channel::ChannelConfig;
using mixsei::channel::ChannelKind;

namespace {

IqBuffer random_buffer(std::size_t n, double fs, std::uint64_t seed) {
  mixsei::RngStream rng(seed, 0);
  IqBuffer x;
  x.sample_rate_hz = fs;
  x.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    x.samples.emplace_back(rng.normal(), rng.normal());
  return x;
}

double power_oracle(const IqBuffer& x) {
  double p = 0.0;
  for (const auto& v : x.samples) p += std::norm(v);
  return p / static_cast<double>(x.size());
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("rician draws have unit mean power and the closed-form spread") {
  // At K = 10 dB: E[|h|^2] = 1 and Var(|h|^2) = (2K+1)/(K+1)^2 = 21/121.
  mixsei::RngStream rng(2025, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx h = mixsei::channel::rician_coeff(10.0, rng);
    const double p = std::norm(h);
    sum += p;
    sum2 += p * p;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(var - 21.0 / 121.0) < 0.01);
}

TEST_CASE("rician line-of-sight part dominates at high K") {
  mixsei::RngStream rng(7, 0);
  // K = 40 dB: scatter variance 1/(K+1) ~ 1e-4, so |h| hugs 1.
  for (int i = 0; i < 1000; ++i) {
    const cplx h = mixsei::channel::rician_coeff(40.0, rng);
    CHECK(std::abs(std::abs(h) - 1.0) < 0.1);
  }
}

TEST_CASE("noiseless awgn mix is the exact sample-wise sum") {
  const IqBuffer a = random_buffer(256, 120e6, 1);
  const IqBuffer b = random_buffer(256, 120e6, 2);
  ChannelConfig cfg;
  cfg.kind = ChannelKind::Awgn;
  cfg.snr_db = kInf;
  REQUIRE(cfg.noiseless());
  mixsei::RngStream rng(0, 0);
  const IqBuffer y = mixsei::channel::mix({a, b}, {cplx(1, 0), cplx(1, 0)}, cfg, rng);
  REQUIRE(y.size() == a.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const cplx want = a.samples[i] + b.samples[i];
    CHECK(y.samples[i].real() == want.real());
    CHECK(y.samples[i].imag() == want.imag());
  }
}

TEST_CASE("awgn ignores fading coefficients (every h forced to 1)") {
  const IqBuffer a = random_buffer(128, 120e6, 3);
  ChannelConfig cfg;
  cfg.kind = ChannelKind::Awgn;
  cfg.snr_db = kInf;
  mixsei::RngStream rng(0, 0);
  const IqBuffer y =
      mixsei::channel::mix({a}, {cplx(0.0, 5.0)}, cfg, rng);  // bogus coeff
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(y.samples[i] == a.samples[i]);
  }
}

TEST_CASE("rician noiseless mix applies the complex coefficients") {
  const IqBuffer a = random_buffer(64, 120e6, 4);
  const IqBuffer b = random_buffer(64, 120e6, 5);
  ChannelConfig cfg;
  cfg.kind = ChannelKind::Rician;
  cfg.snr_db = kInf;
  const cplx ha(0.8, -0.3), hb(-0.1, 1.1);
  mixsei::RngStream rng(0, 0);
  const IqBuffer y = mixsei::channel::mix({a, b}, {ha, hb}, cfg, rng);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const cplx want = ha * a.samples[i] + hb * b.samples[i];
    CHECK(std::abs(y.samples[i] - want) <= 1e-15);
  }
}

TEST_CASE("noise power tracks the requested snr against the mixture power") {
  // Single unit-ish power signal at 0 dB: noise power ~ signal power.
  const std::size_t n = 100000;
  const IqBuffer clean = random_buffer(n, 120e6, 6);
  ChannelConfig cfg;
  cfg.kind = ChannelKind::Awgn;
  cfg.snr_db = 0.0;
  mixsei::RngStream rng(9, 0);
  const IqBuffer noisy = mixsei::channel::mix({clean}, {cplx(1, 0)}, cfg, rng);
  IqBuffer noise;
  noise.sample_rate_hz = clean.sample_rate_hz;
  noise.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    noise.samples[i] = noisy.samples[i] - clean.samples[i];
  const double ratio = power_oracle(noise) / power_oracle(clean);
  CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("snr scales noise power by the expected decade steps") {
  const std::size_t n = 100000;
  const IqBuffer clean = random_buffer(n, 120e6, 8);
  const double ps = power_oracle(clean);
  for (double snr : {-10.0, 0.0, 10.0, 20.0}) {
    ChannelConfig cfg;
    cfg.kind = ChannelKind::Awgn;
    cfg.snr_db = snr;
    mixsei::RngStream rng(17, static_cast<std::uint64_t>(snr + 100));
    const IqBuffer noisy = mixsei::channel::mix({clean}, {cplx(1, 0)}, cfg, rng);
    double pn = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      pn += std::norm(noisy.samples[i] - clean.samples[i]);
    pn /= static_cast<double>(n);
    const double measured_db = 10.0 * std::log10(ps / pn);
    CHECK(std::abs(measured_db - snr) < 0.2);
  }
}

TEST_CASE("mix is deterministic for a fixed stream") {
  const IqBuffer a = random_buffer(512, 120e6, 10);
  ChannelConfig cfg;
  cfg.kind = ChannelKind::Awgn;
  cfg.snr_db = 6.0;
  mixsei::RngStream r1(42, 7), r2(42, 7);
  const IqBuffer y1 = mixsei::channel::mix({a}, {cplx(1, 0)}, cfg, r1);
  const IqBuffer y2 = mixsei::channel::mix({a}, {cplx(1, 0)}, cfg, r2);
  for (std::size_t i = 0; i < y1.size(); ++i) {
    CHECK(y1.samples[i].real() == y2.samples[i].real());
    CHECK(y1.samples[i].imag() == y2.samples[i].imag());
  }
}

TEST_CASE("mix rejects inconsistent inputs") {
  ChannelConfig cfg;
  cfg.snr_db = kInf;
  mixsei::RngStream rng(0, 0);

  CHECK_THROWS_AS(mixsei::channel::mix({}, {}, cfg, rng), std::invalid_argument);

  IqBuffer a = random_buffer(16, 120e6, 11);
  IqBuffer short_b = random_buffer(8, 120e6, 12);
  CHECK_THROWS_AS(
      mixsei::channel::mix({a, short_b}, {cplx(1, 0), cplx(1, 0)}, cfg, rng),
      std::invalid_argument);

  IqBuffer other_rate = random_buffer(16, 60e6, 13);
  CHECK_THROWS_AS(
      mixsei::channel::mix({a, other_rate}, {cplx(1, 0), cplx(1, 0)}, cfg, rng),
      std::invalid_argument);

  CHECK_THROWS_AS(mixsei::channel::mix({a}, {cplx(1, 0), cplx(1, 0)}, cfg, rng),
                  std::invalid_argument);
}

TEST_CASE("config validation") {
  ChannelConfig ok;
  CHECK_NOTHROW(ok.validate());
  ChannelConfig nan_snr;
  nan_snr.snr_db = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nan_snr.validate(), std::invalid_argument);
  ChannelConfig inf_ok;
  inf_ok.snr_db = kInf;
  CHECK_NOTHROW(inf_ok.validate());
  CHECK(inf_ok.noiseless());
  ChannelConfig bad_k;
  bad_k.kind = ChannelKind::Rician;
  bad_k.rician_k_db = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad_k.validate(), std::invalid_argument);
}

}  // TEST_SUITE
