// Little-endian scalar packing over byte buffers.
#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

namespace bathykit::detail {

template <typename T>
inline void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
  std::uint8_t raw[sizeof(T)];
  if constexpr (std::is_floating_point_v<T>) {
    std::memcpy(raw, &value, sizeof(T));  // host is little-endian IEEE 754
  } else {
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (size_t i = 0; i < sizeof(T); ++i)
      raw[i] = static_cast<std::uint8_t>(u >> (8 * i));
  }
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <typename T>
inline T get_le(const std::uint8_t* p) {
  if constexpr (std::is_floating_point_v<T>) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
  } else {
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<U>(p[i]) << (8 * i);
    return static_cast<T>(u);
  }
}

}  // namespace bathykit::detail
