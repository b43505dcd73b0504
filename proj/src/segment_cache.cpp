#include "mlab/segment_cache.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <string>
#include <system_error>
#include <thread>

#include "mlab/errors.hpp"

namespace mlab::cache {

namespace {

template <typename T>
void put_le(std::uint8_t* out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* in) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[i]) << (8 * i);
  return v;
}

}  // namespace

std::array<std::uint8_t, kHeaderSize> encode_header(const Header& h) {
  std::array<std::uint8_t, kHeaderSize> out{};
  std::memcpy(out.data(), kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out.data() + 4, h.version);
  put_le<u64>(out.data() + 8, h.lo);
  put_le<u64>(out.data() + 16, h.hi);
  return out;
}

std::optional<Header> decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) return std::nullopt;
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) return std::nullopt;
  Header h;
  h.version = get_le<std::uint32_t>(bytes.data() + 4);
  h.lo = get_le<u64>(bytes.data() + 8);
  h.hi = get_le<u64>(bytes.data() + 16);
  return h;
}

std::vector<std::uint8_t> encode_segment(const SieveSegment& seg) {
  const u64 len = seg.size();
  std::vector<std::uint8_t> out(kHeaderSize + len * 9);
  const auto header = encode_header({kFormatVersion, seg.lo, seg.hi});
  std::copy(header.begin(), header.end(), out.begin());
  std::uint8_t* lpf = out.data() + kHeaderSize;
  for (u64 i = 0; i < len; ++i) put_le<u64>(lpf + 8 * i, seg.lpf[i]);
  std::copy(seg.lpf_mult.begin(), seg.lpf_mult.end(), lpf + 8 * len);
  return out;
}

std::filesystem::path segment_path(const std::filesystem::path& dir, u64 lo, u64 hi) {
  return dir / ("seg_" + std::to_string(lo) + "_" + std::to_string(hi) + ".mlab");
}

void write_segment(const std::filesystem::path& file, const SieveSegment& seg) {
  std::error_code ec;
  std::filesystem::create_directories(file.parent_path(), ec);
  const auto bytes = encode_segment(seg);
  static std::atomic<unsigned> counter{0};
  auto tmp = file;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "_" +
         std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

std::optional<SieveSegment> read_segment(const std::filesystem::path& file, u64 lo, u64 hi,
                                         std::span<const u64> base_primes) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::array<std::uint8_t, kHeaderSize> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) return std::nullopt;
  const auto header = decode_header(raw);
  if (!header || header->version != kFormatVersion || header->lo != lo || header->hi != hi) {
    return std::nullopt;
  }
  if (hi <= lo) return std::nullopt;
  const u64 len = hi - lo;
  std::vector<std::uint8_t> payload(len * 9);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size())) return std::nullopt;

  SieveSegment seg;
  seg.lo = lo;
  seg.hi = hi;
  seg.lpf.resize(len);
  for (u64 i = 0; i < len; ++i) seg.lpf[i] = get_le<u64>(payload.data() + 8 * i);
  seg.lpf_mult.assign(payload.begin() + static_cast<std::ptrdiff_t>(8 * len), payload.end());
  const u64 root = isqrt(hi - 1);
  for (u64 p : base_primes) {
    if (p > root) break;
    seg.base_primes.push_back(p);
  }
  return seg;
}

}  // namespace mlab::cache
