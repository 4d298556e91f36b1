#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

namespace dllab {

/// 64-bit FNV-1a over a byte stream. Used for config, dataset and model digests.
class Digest {
 public:
  Digest& update(std::span<const std::byte> bytes) {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  Digest& update(std::string_view text) {
    return update(std::as_bytes(std::span(text.data(), text.size())));
  }

  template <class T>
    requires std::is_arithmetic_v<T>
  Digest& update_value(T value) {
    std::byte raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    return update(std::span<const std::byte>(raw, sizeof(T)));
  }

  std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t digest_of(std::string_view text) { return Digest().update(text).value(); }

std::string to_hex(std::uint64_t value);

}  // namespace dllab
