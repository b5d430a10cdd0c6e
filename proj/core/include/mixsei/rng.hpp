#pragma once

#include <cstdint>
#include <random>

namespace mixsei {

// Deterministic random stream addressed by (seed, stream_id).
// The same pair yields the same draw sequence on every run and platform:
// the engine is the fully specified mt19937_64 and all distributions are
// implemented here instead of using the (implementation-defined) standard
// library ones.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Unbiased uniform integer on [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n);
  // Standard normal via Box-Muller; draws come out in pairs.
  double normal();
  // Fair bit.
  int bit();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 eng_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace mixsei
