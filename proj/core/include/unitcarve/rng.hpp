#pragma once

#include <cstdint>
#include <random>

namespace unitcarve {

// mt19937_64 with bounded draws done by rejection, so sequences are the
// same with every standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }
  // Uniform in [0, n); n must be positive.
  uint64_t below(uint64_t n);
  // Uniform in [lo, hi].
  int64_t between(int64_t lo, int64_t hi);

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer over (seed, stream): independent sub-seeds.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

}  // namespace unitcarve
