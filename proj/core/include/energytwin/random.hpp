#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "energytwin/types.hpp"

namespace energytwin {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over the bytes of `s`; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view s);

/// Seed for the stream owned by (master seed, agent, tick). Draws made through
/// this stream do not depend on how many other agents drew before it.
std::uint64_t stream_seed(std::uint64_t master, const AgentId& agent, Tick tick);

inline Rng make_stream(std::uint64_t master, const AgentId& agent, Tick tick) {
  return Rng{stream_seed(master, agent, tick)};
}

/// Standard normal draw via Box-Muller. Written out rather than using
/// std::normal_distribution, whose output is library-specific.
double standard_normal(Rng& rng);

inline double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace energytwin
