#include "mlab/sieve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "mlab/errors.hpp"
#include "mlab/segment_cache.hpp"

namespace mlab {

u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && r > n / r) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

std::vector<u64> primes_up_to(u64 limit) {
  std::vector<u64> primes;
  if (limit < 2) return primes;
  std::vector<std::uint8_t> composite(limit + 1, 0);
  for (u64 p = 2; p * p <= limit; ++p) {
    if (composite[p]) continue;
    for (u64 m = p * p; m <= limit; m += p) composite[m] = 1;
  }
  for (u64 n = 2; n <= limit; ++n) {
    if (!composite[n]) primes.push_back(n);
  }
  return primes;
}

namespace {

bool is_prime_trial(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d <= n / d; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

u64 first_multiple_at_least(u64 p, u64 lo) { return ((lo + p - 1) / p) * p; }

}  // namespace

SieveSegment build_segment(u64 lo, u64 hi, std::span<const u64> base_primes) {
  if (lo == 0 || hi <= lo) {
    throw RangeError("build_segment: need 1 <= lo < hi, got lo=" + std::to_string(lo) +
                     " hi=" + std::to_string(hi));
  }
  if (hi - 1 > kMaxN) throw RangeError("build_segment: hi exceeds 2^63");

  const u64 root = isqrt(hi - 1);
  SieveSegment seg;
  seg.lo = lo;
  seg.hi = hi;
  u64 last = 1;
  for (u64 p : base_primes) {
    if (p > root) break;
    if (p <= last) throw PreconditionError("build_segment: base_primes must be ascending primes");
    seg.base_primes.push_back(p);
    last = p;
  }
  for (u64 c = last + 1; c <= root; ++c) {
    if (is_prime_trial(c)) {
      throw PreconditionError("build_segment: base_primes must cover all primes <= " +
                              std::to_string(root) + " (missing " + std::to_string(c) + ")");
    }
  }

  const u64 len = hi - lo;
  seg.lpf.assign(len, 0);
  seg.lpf_mult.assign(len, 0);
  for (u64 p : seg.base_primes) {
    for (u64 m = std::max(p * p, first_multiple_at_least(p, lo)); m < hi; m += p) {
      if (seg.lpf[m - lo] == 0) {
        seg.lpf[m - lo] = p;
        seg.lpf_mult[m - lo] = 1;
      }
    }
    // Raise the exponent for entries whose least prime is p.
    for (u64 q = p * p; q <= hi - 1; q *= p) {
      for (u64 m = first_multiple_at_least(q, lo); m < hi; m += q) {
        if (seg.lpf[m - lo] == p) ++seg.lpf_mult[m - lo];
      }
      if (q > (hi - 1) / p) break;
    }
  }
  for (u64 i = 0; i < len; ++i) {
    if (seg.lpf[i] != 0) continue;
    if (lo + i == 1) {
      seg.lpf[i] = 1;
      seg.lpf_mult[i] = 0;
    } else {
      seg.lpf[i] = lo + i;
      seg.lpf_mult[i] = 1;
    }
  }
  return seg;
}

std::vector<std::int8_t> mobius_from_segment(const SieveSegment& seg) {
  const u64 len = seg.size();
  std::vector<std::int8_t> mu(len, 1);
  std::vector<u64> found(len, 1);
  for (u64 i = 0; i < len; ++i) {
    if (seg.lpf_mult[i] > 1) mu[i] = 0;
  }
  for (u64 p : seg.base_primes) {
    for (u64 m = first_multiple_at_least(p, seg.lo); m < seg.hi; m += p) {
      mu[m - seg.lo] = static_cast<std::int8_t>(-mu[m - seg.lo]);
      found[m - seg.lo] *= p;
    }
    const u64 sq = p * p;
    for (u64 m = first_multiple_at_least(sq, seg.lo); m < seg.hi; m += sq) mu[m - seg.lo] = 0;
  }
  // At most one prime factor exceeds isqrt(hi - 1).
  for (u64 i = 0; i < len; ++i) {
    if (mu[i] != 0 && found[i] != seg.lo + i) mu[i] = static_cast<std::int8_t>(-mu[i]);
  }
  return mu;
}

std::vector<double> lambda_from_segment(const SieveSegment& seg) {
  std::vector<double> log_base(seg.base_primes.size());
  for (std::size_t j = 0; j < seg.base_primes.size(); ++j) {
    log_base[j] = std::log(static_cast<double>(seg.base_primes[j]));
  }
  const u64 len = seg.size();
  std::vector<double> lambda(len, 0.0);
  for (u64 i = 0; i < len; ++i) {
    const u64 n = seg.lo + i;
    const u64 p = seg.lpf[i];
    if (n == 1) continue;
    u64 power = 1;
    for (unsigned k = 0; k < seg.lpf_mult[i]; ++k) power *= p;
    if (power != n) continue;
    const auto it = std::lower_bound(seg.base_primes.begin(), seg.base_primes.end(), p);
    if (it != seg.base_primes.end() && *it == p) {
      lambda[i] = log_base[static_cast<std::size_t>(it - seg.base_primes.begin())];
    } else {
      lambda[i] = std::log(static_cast<double>(p));
    }
  }
  return lambda;
}

SieveTable sieve_table(u64 n_max, const SieveOptions& options) {
  if (n_max == 0) throw RangeError("sieve_table: n_max must be >= 1");
  constexpr u64 kDenseCap = (u64{1} << 32) - 1;
  if (n_max > kDenseCap) {
    throw CapabilityError("sieve_table: dense tables are limited to n_max <= 2^32 - 1",
                          static_cast<double>(kDenseCap));
  }
  if (options.segment_size == 0) throw RangeError("sieve_table: segment_size must be positive");

  SieveTable table;
  table.n_max = n_max;
  table.mu.assign(n_max + 1, 0);
  table.lambda.assign(n_max + 1, 0.0);

  const std::vector<u64> base = primes_up_to(isqrt(n_max));
  const u64 seg_size = options.segment_size;
  const u64 n_segments = (n_max + seg_size - 1) / seg_size;
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<u64>(threads, 1, n_segments));

  std::atomic<u64> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      for (u64 s = next++; s < n_segments; s = next++) {
        const u64 lo = 1 + s * seg_size;
        const u64 hi = std::min(lo + seg_size, n_max + 1);
        std::optional<SieveSegment> seg;
        std::filesystem::path file;
        if (options.cache_dir) {
          file = cache::segment_path(*options.cache_dir, lo, hi);
          seg = cache::read_segment(file, lo, hi, base);
        }
        if (!seg) {
          seg = build_segment(lo, hi, base);
          if (options.cache_dir) cache::write_segment(file, *seg);
        }
        const auto mu = mobius_from_segment(*seg);
        const auto lambda = lambda_from_segment(*seg);
        std::copy(mu.begin(), mu.end(), table.mu.begin() + static_cast<std::ptrdiff_t>(lo));
        std::copy(lambda.begin(), lambda.end(),
                  table.lambda.begin() + static_cast<std::ptrdiff_t>(lo));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n_segments;
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

std::vector<std::int8_t> linear_sieve_mobius(u64 n_max) {
  std::vector<std::int8_t> mu(n_max + 1, 0);
  if (n_max == 0) return mu;
  std::vector<std::uint32_t> primes;
  std::vector<std::uint8_t> composite(n_max + 1, 0);
  mu[1] = 1;
  for (u64 i = 2; i <= n_max; ++i) {
    if (!composite[i]) {
      primes.push_back(static_cast<std::uint32_t>(i));
      mu[i] = -1;
    }
    for (std::uint32_t p : primes) {
      const u64 m = i * p;
      if (m > n_max) break;
      composite[m] = 1;
      if (i % p == 0) {
        mu[m] = 0;
        break;
      }
      mu[m] = static_cast<std::int8_t>(-mu[i]);
    }
  }
  return mu;
}

}  // namespace mlab
