#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace udld {

// Deterministic RNG used everywhere in the simulator. mt19937_64 output is
// fully specified by the standard; the uniform/int/shuffle helpers are
// hand-rolled because the std distributions and std::shuffle are
// implementation-defined and would break the byte-identical-output contract
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 bits of entropy.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates with the portable uniform_int above.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 step; used to derive independent stream seeds from a run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace udld
