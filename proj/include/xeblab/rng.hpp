#pragma once

#include <cstdint>

namespace xeblab {

// SplitMix64 finalizer (Steele, Lea & Flood 2014): a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based pseudo-random stream: output i of a stream with key k is
// mix64(k + i*gamma), so a stream is fully named by its key and position.
// split(tag) derives an independent child key from (key, tag) without
// touching the parent's counter; a (seed, path-of-tags) pair therefore names
// the same stream on every platform and in every thread.
class SplitStream {
 public:
  explicit SplitStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + ++counter_ * kGamma); }

  SplitStream split(std::uint64_t tag) const {
    return SplitStream(mix64(key_ ^ mix64(tag + kGamma)));
  }

  // Uniform in [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound >= 1 (Lemire multiply-shift).
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  bool next_bernoulli(double p) { return next_unit() < p; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace xeblab
