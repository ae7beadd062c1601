#pragma once

#include <cstdint>
#include <random>

namespace squit {

// splitmix64 finalizer; used to derive independent per-item streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source with platform-independent draws. The standard
// distributions are implementation-defined, so uniform and bernoulli are
// computed here directly from the engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0) {
    return Rng(mix64(mix64(seed ^ mix64(salt)) + index));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return unit() < p; }

  void discard(unsigned long long n) { engine_.discard(n); }

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace squit
