#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace zsl {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's bytes; throws DataError if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// 64-bit FNV-1a. Used to derive per-token and per-class seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace zsl
