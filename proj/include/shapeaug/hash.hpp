#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace shapeaug {

// 64-bit FNV-1a. Stable across platforms; used for content digests and RNG stream labels.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffsetBasis = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  constexpr void update(std::span<const std::byte> bytes) noexcept {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= kPrime;
    }
  }

  constexpr void update(std::string_view text) noexcept {
    for (char c : text) {
      state_ ^= static_cast<std::uint8_t>(c);
      state_ *= kPrime;
    }
  }

  constexpr void update_u64(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffu;
      state_ *= kPrime;
    }
  }

  constexpr std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffsetBasis;
};

constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  Fnv1a64 h;
  h.update(text);
  return h.digest();
}

inline std::uint64_t fnv1a64(std::span<const std::byte> bytes) noexcept {
  Fnv1a64 h;
  h.update(bytes);
  return h.digest();
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xfu];
    v >>= 4;
  }
  return out;
}

}  // namespace shapeaug
