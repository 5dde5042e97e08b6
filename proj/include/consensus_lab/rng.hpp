#pragma once

#include <cstdint>
#include <random>

namespace consensus_lab {

using Rng = std::mt19937_64;

/// Independent stream for replication `index` of a batch seeded with `seed`.
/// The stream depends only on (seed, index), never on which worker runs it.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x636f6e73u};
  return Rng(seq);
}

}  // namespace consensus_lab
