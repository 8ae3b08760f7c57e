#pragma once

#include <cstdint>
#include <limits>

namespace krbn {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Key of substream `index` under master seed `master`:
//   key = mix64(mix64(master) + (index + 1) * 0x9E3779B97F4A7C15)
// The four xoshiro state words are the next four SplitMix64 outputs started
// at `key`. Substreams are addressed by index, never by draw order, so path i
// sees the same numbers whatever the worker count.
constexpr std::uint64_t substream_key(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

// xoshiro256** with the substream seeding above. Value type: copying a
// stream forks it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t master, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }
  result_type next() noexcept;

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  // Standard normal (Box-Muller; the second variate is cached).
  double normal() noexcept;
  // Standard exponential.
  double exponential() noexcept;

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace krbn
