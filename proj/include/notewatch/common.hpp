#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace notewatch {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a; stable across platforms, used for substream derivation and
// artifact checksums.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Input or configuration problem; the CLI maps this to exit code 1.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure during execution; the CLI maps this to exit code 2.
class runtime_failure : public std::runtime_error {
 public:
  explicit runtime_failure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace notewatch
