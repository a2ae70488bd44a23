#pragma once

#include <cstdint>
#include <random>

#include "fqma/stats.hpp"

namespace fqma {

// Deterministic generator with fixed output streams.  std::*_distribution
// is implementation-defined, so sampling is done from raw 64-bit draws to
// keep datasets bit-identical across platforms and compiler versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_base_(seed), eng_(mix(seed)) {}

  // uniform on [0,1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // uniform on (0,1), usable as an inverse-CDF argument
  double uniform_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    return mean + sd * stats::normal_quantile(uniform_open());
  }

  // uniform integer on {lo, ..., hi}
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(eng_() % span);
  }

  // Independent substream; stream ids keep purposes (scores, times, noise)
  // decoupled so adding draws to one stream never shifts another.
  Rng substream(std::uint64_t stream_id) const {
    return Rng(mix(seed_base_ ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1))));
  }

  static Rng for_replication(std::uint64_t seed, std::uint64_t replication) {
    return Rng(seed ^ mix(replication + 0x51ab3c7fULL));
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_base_;
  std::mt19937_64 eng_;
};

}  // namespace fqma
