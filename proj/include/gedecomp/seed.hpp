#pragma once

#include <cstdint>
#include <string_view>

namespace gedecomp {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a 64-bit hash.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-unit chain seed: depends only on the master seed and the unit's own
/// key, so adding or removing a sibling leaves every other chain unchanged.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view key) noexcept {
  return mix64(master ^ mix64(fnv1a64(key)));
}

}  // namespace gedecomp
