#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace dcrec {

/// 64-bit linear congruential generator. Every random draw in the library
/// goes through this type so seeded traces are reproducible across
/// languages: state' = state * 6364136223846793005 + 1442695040888963407
/// (mod 2^64), and each draw returns the updated state.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit constexpr Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  /// Uniform in [0, 1): the top 53 bits of the next state.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n); n must be positive. Uses the high bits
  /// (multiply-shift), the low bits of an LCG have short periods.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal() noexcept;

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

/// FNV-1a over raw bytes. Used for seeds derived from strings and for
/// artifact/config hashes.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 14695981039346656037ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Derive an independent stream seed from a base seed and a list of
/// integer coordinates (epoch, step, sample, ...).
std::uint64_t mix_seed(std::uint64_t base, std::span<const std::uint64_t> coords) noexcept;

/// Fisher-Yates shuffle of indices [0, n) driven by the generator.
template <typename Vec>
void shuffle_in_place(Vec& v, Lcg64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace dcrec
