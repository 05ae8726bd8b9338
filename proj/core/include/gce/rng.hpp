#pragma once

#include <cstdint>
#include <vector>
#include <random>

namespace gce {

// All randomness in the library flows through this wrapper so a
// (seed, call sequence) pair fully determines a run.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1), 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller. Uses both uniforms per call, no cached second value, so the
  // stream position after a call does not depend on call parity.
  double normal(double mean, double stddev);

  // Exact uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t x);

  // Derives an independent child seed for a named stream. Used to give
  // epochs, repeats and sweep cells their own deterministic generators.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL));
  }

private:
  std::mt19937_64 gen_;
};

} // namespace gce
