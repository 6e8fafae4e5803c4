#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dircut {

// Counted seed splitting: one 64-bit root seed, every sub-algorithm pulls a
// child stream by label so runs are reproducible component by component.
class RngTree {
 public:
  explicit RngTree(std::uint64_t seed) : seed_(seed) {}

  RngTree child(std::string_view label) const {
    std::uint64_t h = seed_;
    for (char c : label) h = mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return RngTree(h);
  }

  RngTree child(std::uint64_t counter) const { return RngTree(mix(seed_ ^ mix(counter + 0x9e3779b97f4a7c15ULL))); }

  std::mt19937_64 stream() const { return std::mt19937_64(mix(seed_)); }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace dircut
