// Seeding scheme: every path (or pair of paths) owns an independent engine
// keyed by (base seed, index), so a path is reproducible regardless of the
// batch it was generated in or the number of worker threads.
#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <boost/random/normal_distribution.hpp>

namespace fbmlab {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of stream `index` under `base_seed`.
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t index);

/// Standard normal variates from a 64-bit Mersenne twister (ziggurat method).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(mix64(seed)) {}

  double operator()() { return normal_(engine_); }

  void fill(std::span<double> out) {
    for (double& x : out) x = normal_(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace fbmlab
