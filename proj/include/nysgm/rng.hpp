#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace nysgm {

/// Seeded random source with platform-independent output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not (libstdc++ and libc++ differ),
/// so the variates below are derived from raw engine words:
///   - uniform01: top 53 bits scaled by 2^-53, in [0, 1)
///   - index(n): unbiased rejection sampling on the raw word
///   - normal: Marsaglia polar method, caching the second variate
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  std::size_t index(std::size_t n);
  double normal();

  std::uint64_t next_word() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent child seed from (seed, stream) using the splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace nysgm
