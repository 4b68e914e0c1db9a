#pragma once

#include <cstdint>
#include <random>

namespace fluxsr {

// Independent streams, so the same seed never feeds two different draws.
enum class RngStream : std::uint32_t {
  junctions = 1,
  spin_frequencies = 2,
};

// Engine for one (seed, stream, index) triple. Draws for index i do not
// depend on how many other indices were drawn before, so parallel sampling is
// order independent.
inline std::mt19937_64 keyed_engine(std::uint64_t seed, RngStream stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace fluxsr
