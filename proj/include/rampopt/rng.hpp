#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rampopt {

// splitmix64 finalizer. Used only to decorrelate derived seeds, never as the
// sampling engine itself.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One master seed, many independent named streams. Every random decision in
// the code base draws from an engine seeded this way, so results depend only
// on (master, tag, index) and never on evaluation order or thread count.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ fnv1a(tag)) + index);
}

inline std::mt19937_64 engine_for(std::uint64_t master, std::string_view tag,
                                  std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, tag, index));
}

}  // namespace rampopt
