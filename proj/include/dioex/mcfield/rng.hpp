#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dioex {

// Substream tags; one stream per (seed, index, tag).
enum class StreamTag : std::uint64_t { Field = 1, Law = 2, Inner = 16 };

// Deterministic stream keyed by (seed, index, tag). Engine, seeding and the
// transforms below are fully specified, so draws are identical across platforms.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
    std::seed_seq seq{lo(seed), hi(seed), lo(index), hi(index), lo(tag), hi(tag)};
    engine_.seed(seq);
  }
  Stream(std::uint64_t seed, std::uint64_t index, StreamTag tag) : Stream(seed, index, static_cast<std::uint64_t>(tag)) {}

  // Uniform on (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53; }

  // Standard Gaussian by Box-Muller.
  double normal() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2 * std::log(uniform()));
    const double a = 2 * M_PI * uniform();
    spare_ = r * std::sin(a);
    cached_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint32_t lo(std::uint64_t x) { return static_cast<std::uint32_t>(x); }
  static std::uint32_t hi(std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

}  // namespace dioex
