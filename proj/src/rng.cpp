#include "dcrec/rng.hpp"

#include <cmath>
#include <numbers>

namespace dcrec {

double Lcg64::normal() noexcept {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t base, std::span<const std::uint64_t> coords) noexcept {
  // splitmix64 finalizer over each coordinate
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (auto c : coords) h = mix(h ^ mix(c));
  return h;
}

}  // namespace dcrec
