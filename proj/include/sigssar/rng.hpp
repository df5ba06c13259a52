#pragma once

#include <cstdint>
#include <random>

namespace sigssar {

/// Named sub-streams of a master seed. Values are part of the reproducibility
/// contract: changing them changes every generated dataset.
enum class Stream : std::uint32_t {
  replicate = 1,
  sites = 2,
  slopes = 3,
  gaussian_process = 4,
  model2_coeffs = 5,
  noise = 6,
  kmeans = 7,
  cluster_pick = 8,
  ordinary = 9,
  split = 10,
};

/// Counter-based split: (seed, stream, index) -> independent 64-bit seed.
/// std::seed_seq's mixing algorithm is fixed by the standard, so the derived
/// values are portable.
inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, stream, index));
}

}  // namespace sigssar
