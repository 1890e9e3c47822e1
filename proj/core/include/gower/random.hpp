#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gower {

using Rng = std::mt19937_64;

/// Counter-based child seed derivation. A child stream is identified by the
/// master seed, a stream name and up to three counters, so the draw order of
/// one stream never depends on how many draws another stream made.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0);

inline Rng make_rng(std::uint64_t master, std::string_view stream,
                    std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) {
  return Rng(derive_seed(master, stream, a, b, c));
}

}  // namespace gower
