#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace cdm {

// SplitMix64 finalizer, used to derive engine seeds from (seed, stream) pairs.
std::uint64_t splitmix64(std::uint64_t x);

// Inverse standard normal CDF (Wichura's AS 241, double precision branch).
// Accurate to about 1e-15 over (0, 1); p outside (0, 1) is rejected.
double inverse_normal_cdf(double p);

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fully specified by the standard, seeded with
// splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15)). Uniform doubles
// take the top 53 bits of one engine draw; normal deviates apply the inverse
// CDF to one uniform draw. This keeps every generated dataset reproducible
// from (seed, stream) alone, independent of platform or standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform01();
  // Standard normal deviate, one uniform draw per call.
  double normal();
  // Uniform integer in [0, n); rejection sampled, so unbiased for any n.
  std::size_t uniform_index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace cdm
