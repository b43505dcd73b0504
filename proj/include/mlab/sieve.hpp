#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace mlab {

using u64 = std::uint64_t;
using i64 = std::int64_t;

/// Largest integer the workbench accepts anywhere.
inline constexpr u64 kMaxN = (u64{1} << 63) - 1;

/// Least-prime-factor data for the block [lo, hi).
///
/// For every n > 1 in the block, lpf[n - lo] is the smallest prime dividing n
/// and lpf_mult[n - lo] its exponent.  n = 1 carries the sentinel (1, 0).
/// Segments are immutable once built.
struct SieveSegment {
  u64 lo = 1;
  u64 hi = 1;
  std::vector<u64> lpf;
  std::vector<std::uint8_t> lpf_mult;
  /// All primes <= isqrt(hi - 1), ascending.
  std::vector<u64> base_primes;

  u64 size() const { return hi - lo; }
};

/// Floor square root, exact for all 64-bit inputs.
u64 isqrt(u64 n);

/// Primes <= limit by a plain sieve of Eratosthenes.
std::vector<u64> primes_up_to(u64 limit);

/// Sieve [lo, hi).  base_primes must contain every prime <= isqrt(hi - 1);
/// extra larger primes are ignored.  Throws RangeError when hi <= lo or
/// lo == 0, PreconditionError when a needed prime is missing.
SieveSegment build_segment(u64 lo, u64 hi, std::span<const u64> base_primes);

/// mu(n) for n in [seg.lo, seg.hi), index n - lo.
std::vector<std::int8_t> mobius_from_segment(const SieveSegment& seg);

/// Lambda(n) for n in [seg.lo, seg.hi), natural-log units.
std::vector<double> lambda_from_segment(const SieveSegment& seg);

struct SieveOptions {
  u64 segment_size = u64{1} << 20;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// When set, segments are read from / written to this directory.
  std::optional<std::filesystem::path> cache_dir;
};

/// Dense mu and Lambda over [1, n_max]; index 0 is unused (mu = 0, Lambda = 0).
struct SieveTable {
  u64 n_max = 0;
  std::vector<std::int8_t> mu;
  std::vector<double> lambda;
};

/// Segmented sieve over [1, n_max].  Segments are processed concurrently and
/// each writes only its own slice, so the result does not depend on the
/// thread count or the segment size.  n_max must stay below 2^32 (dense
/// tables); larger requests throw CapabilityError.
SieveTable sieve_table(u64 n_max, const SieveOptions& options = {});

/// Linear (Euler) sieve for mu over [1, n_max].  Shares no code with the
/// segmented path; used to cross-validate it.
std::vector<std::int8_t> linear_sieve_mobius(u64 n_max);

}  // namespace mlab
