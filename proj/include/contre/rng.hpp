#pragma once

// Portable random helpers. The standard <random> distributions are
// implementation-defined, so every draw that feeds a reproducible artifact
// goes through these instead.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace contre {

using Engine = std::mt19937_64;

/// 64-bit FNV-1a, incremental.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  Fnv1a64& bytes(std::span<const unsigned char> data) noexcept {
    for (unsigned char b : data) {
      state_ ^= b;
      state_ *= kPrime;
    }
    return *this;
  }
  Fnv1a64& text(std::string_view s) noexcept {
    return bytes({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
  }
  /// Little-endian 8 bytes.
  Fnv1a64& u64(std::uint64_t v) noexcept {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    return bytes(buf);
  }
  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

/// Uniform integer in [0, bound) by rejection; bound must be > 0.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t bound) {
  // 2^64 mod bound; values below it would bias the low residues.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t x = eng();
  while (x < threshold) x = eng();
  return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Engine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(eng);
}

inline bool coin(Engine& eng) { return (eng() >> 63) != 0; }

}  // namespace contre
