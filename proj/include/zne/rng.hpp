#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace zne {

/// 64-bit FNV-1a over raw bytes. Used both for hashing ids into seeds and
/// for deriving child stream keys; stable across platforms.
inline std::uint64_t fnv1a64_bytes(const void* data, std::size_t len,
                                   std::uint64_t h = 14695981039346656037ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 14695981039346656037ULL) {
  return fnv1a64_bytes(s.data(), s.size(), h);
}

/// SplitMix64 output function.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based deterministic random stream. Output i is a pure function
/// of (key, i), so streams are splittable: derive() builds an independent
/// child stream from a text label without consuming parent state. This keeps
/// generation reproducible regardless of evaluation order and lets any
/// subset of a dataset be regenerated in isolation.
class SplitMixStream {
 public:
  explicit SplitMixStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() {
    counter_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(key_ + counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Child stream keyed by (key, label); independent of parent position.
  SplitMixStream derive(std::string_view label) const {
    std::uint64_t h = fnv1a64_bytes(&key_, sizeof(key_));
    h = fnv1a64(label, h);
    return SplitMixStream(splitmix64_mix(h));
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace zne
