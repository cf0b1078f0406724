// random_stream.hpp
//
// Counter-based uniforms: every draw is a pure function of its key, so the
// draws an agent sees never depend on thread scheduling or on how many
// other draws happened first.
#pragma once

#include <cstdint>

namespace nrd {

enum class StreamTag : std::uint64_t { play = 0x706c6179, cce = 0x63636521 };

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_bits(std::uint64_t seed, StreamTag tag, std::uint64_t agent,
                                    std::uint64_t step, std::uint64_t draw = 0) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ static_cast<std::uint64_t>(tag));
  k = splitmix64(k ^ agent);
  k = splitmix64(k ^ step);
  return splitmix64(k ^ draw);
}

// Uniform in [0, 1) with 53 random bits.
constexpr double stream_uniform(std::uint64_t seed, StreamTag tag, std::uint64_t agent,
                                std::uint64_t step, std::uint64_t draw = 0) {
  return static_cast<double>(stream_bits(seed, tag, agent, step, draw) >> 11) * 0x1.0p-53;
}

}  // namespace nrd
