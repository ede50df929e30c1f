#ifndef DMCA_UTIL_HASH_HPP
#define DMCA_UTIL_HASH_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace dmca {

// FNV-1a 64-bit, used to stamp output files with a config fingerprint.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace dmca

#endif
