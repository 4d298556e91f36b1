#pragma once

#include <cstdint>
#include <random>

namespace dllab {

/// Named random streams. Each stream is keyed independently so that, e.g.,
/// dataset generation and weight initialization never share draws.
enum class Stream : std::uint64_t {
  data = 1,
  init = 2,
  noise = 3,
  projections = 4,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
      : seed_(seed), stream_(stream), index_(index), engine_(key(seed, stream, index)) {}

  /// Independent child stream, e.g. per trajectory or per ensemble member.
  Rng substream(std::uint64_t child) const {
    return Rng(seed_, stream_, splitmix64(index_ ^ splitmix64(child + 0x632be59bd9b4e019ULL)));
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }
  std::uint64_t next() { return engine_(); }
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::uint64_t key(std::uint64_t seed, Stream stream, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(stream) << 32) ^
                      splitmix64(index + 1));
  }

  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dllab
