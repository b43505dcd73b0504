#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mlab/sieve.hpp"

namespace mlab::cache {

// On-disk layout, all little-endian:
//   "MLAB" | version u32 | lo u64 | hi u64 | lpf u64[hi-lo] | mult u8[hi-lo]
inline constexpr std::array<char, 4> kMagic = {'M', 'L', 'A', 'B'};
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 8;

struct Header {
  std::uint32_t version = kFormatVersion;
  u64 lo = 0;
  u64 hi = 0;
};

std::array<std::uint8_t, kHeaderSize> encode_header(const Header& h);
/// nullopt when the magic does not match.
std::optional<Header> decode_header(std::span<const std::uint8_t> bytes);

/// Serialized form of a whole segment.
std::vector<std::uint8_t> encode_segment(const SieveSegment& seg);

std::filesystem::path segment_path(const std::filesystem::path& dir, u64 lo, u64 hi);

/// Writes through a temporary file and renames it into place.
void write_segment(const std::filesystem::path& file, const SieveSegment& seg);

/// Loads a cached segment.  Returns nullopt when the file is missing, the
/// header does not match (magic, version, lo, hi) or the payload is short.
std::optional<SieveSegment> read_segment(const std::filesystem::path& file, u64 lo, u64 hi,
                                         std::span<const u64> base_primes);

}  // namespace mlab::cache
