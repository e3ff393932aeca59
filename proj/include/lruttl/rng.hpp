#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace lruttl {

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Derives a stream key from a master seed and up to two indices
// (e.g. replication, content). Distinct inputs give unrelated keys.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
  std::uint64_t k = detail::mix64(seed + detail::kGolden);
  k = detail::mix64(k ^ (a + 0x632BE59BD9B4E019ULL));
  k = detail::mix64(k ^ (b + 0x8CB92BA72F3D8DD7ULL));
  return k;
}

// Counter-based generator: the n-th output is a pure function of (key, n),
// so streams need 16 bytes of state and are reproducible under any
// scheduling of replications. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key), salt_(detail::mix64(~key)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t c = counter_++;
    return detail::mix64(detail::mix64(key_ + (c + 1) * detail::kGolden) ^ salt_);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t salt_;
  std::uint64_t counter_ = 0;
};

// Uniform on [0, 1).
template <class Rng>
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1); safe as a log argument.
template <class Rng>
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

template <class Rng>
inline double standard_normal(Rng& rng) {
  // Box-Muller, one variate per call; the simulation draws few normals.
  const double u1 = uniform_open01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
}

}  // namespace lruttl
