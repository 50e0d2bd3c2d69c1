#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace erpomdp {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream index); used to give every episode or
/// worker its own generator so results do not depend on scheduling.
inline Rng derived_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

/// Draws an index from an (approximately) normalized pmf by inverse CDF.
inline std::size_t sample_categorical(std::span<const double> pmf, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] <= 0.0) continue;
    acc += pmf[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

}  // namespace erpomdp
