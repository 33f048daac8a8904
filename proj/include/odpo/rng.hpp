#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace odpo {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for stream `keys...` under `master`. Pure function of its inputs, so
// replicas can be generated in any order (or in parallel) with identical
// results.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> keys);

// Thin wrapper around mt19937_64. The variate transforms are written out
// here instead of using <random> distributions, whose output is
// implementation-defined, so that seeds reproduce across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Standard normal (Marsaglia polar method).
  double normal();

  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace odpo
