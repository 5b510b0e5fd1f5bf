#pragma once

#include <cstdint>
#include <string_view>

namespace poselift {

// Counter-based stream built on the SplitMix64 finalizer. A stream is fully
// described by (key, counter): draw n is mix(key + n * golden), so any stream
// can be reconstructed from its key and position, and child streams are
// derived by hashing a label into the parent key rather than by consuming
// parent draws. Splitting therefore never perturbs the parent sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}

  // Child stream for a named purpose ("dropout", "shuffle", ...).
  Rng split(std::string_view label) const;
  // Child stream for an index (epoch, step, sequence number).
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller (two uniforms per draw, cosine branch).
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace poselift
