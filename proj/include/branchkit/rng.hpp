#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace branchkit {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

// Identifies one logical random stream. Equal (master, stream) pairs
// reproduce identical draws regardless of scheduling, so parallel code
// derives one stream per task instead of sharing generator state.
struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  Seed derive(std::uint64_t substream) const {
    return Seed{master, detail::mix64(stream + detail::kGolden * (substream + 1))};
  }
};

// Counter-based generator: output n is a hash of (seed, n), the SplitMix64
// sequence keyed on the Seed. No hidden state beyond the counter.
class Rng {
 public:
  explicit Rng(Seed seed)
      : key_(detail::mix64(detail::mix64(seed.master) ^
                           detail::mix64(seed.stream + detail::kGolden))) {}

  std::uint64_t next_u64() {
    counter_ += detail::kGolden;
    return detail::mix64(key_ + counter_);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform in {0, ..., n-1}; unbiased via rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Number of failures before the first success of a Bernoulli(p) sequence.
  // Callers must ensure p > 0; p >= 1 returns 0.
  std::uint64_t geometric_skip(double p) {
    if (p >= 1.0) return 0;
    const double u = 1.0 - next_double();  // (0, 1]
    const double g = std::floor(std::log(u) / std::log1p(-p));
    if (g >= 9.22e18) return std::numeric_limits<std::uint64_t>::max() / 2;
    return static_cast<std::uint64_t>(g);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace branchkit
