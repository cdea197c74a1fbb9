#pragma once

#include <cstdint>
#include <random>

namespace uficlab {

/// splitmix64 step; used to derive decorrelated stream seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for substream `index` of purpose `tag`, independent of call order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index = 0) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (tag * 0x9e3779b97f4a7c15ULL);
  std::uint64_t b = splitmix64(s);
  s = b ^ (index + 0x2545f4914f6cdd1dULL);
  return splitmix64(s);
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t tag,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, tag, index));
}

/// Stream tags; fixed so adding a consumer never shifts existing streams.
namespace seed_tag {
inline constexpr std::uint64_t kForceNoise = 1;
inline constexpr std::uint64_t kSkillWalk = 2;
inline constexpr std::uint64_t kInitWeights = 3;
inline constexpr std::uint64_t kDropout = 4;
inline constexpr std::uint64_t kShuffle = 5;
inline constexpr std::uint64_t kCollect = 6;
}  // namespace seed_tag

}  // namespace uficlab
