#pragma once
#include <cstdint>
#include <string_view>

namespace nnklab {

// FNV-1a, used for config fingerprints.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace nnklab
