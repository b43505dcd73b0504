#pragma once

// Independent reference implementations by trial division.  Slow, but they
// share no code with the library.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

using u64 = std::uint64_t;

/// (smallest prime factor, its exponent); (1, 0) for n = 1.
inline std::pair<u64, int> lpf(u64 n) {
  if (n == 1) return {1, 0};
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      int e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      return {p, e};
    }
  }
  return {n, 1};
}

inline int mobius(u64 n) {
  int sign = 1;
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      sign = -sign;
    }
  }
  if (n > 1) sign = -sign;
  return sign;
}

inline double mangoldt(u64 n) {
  if (n < 2) return 0.0;
  auto [p, e] = lpf(n);
  u64 q = 1;
  for (int i = 0; i < e; ++i) q *= p;
  return q == n ? std::log(static_cast<double>(p)) : 0.0;
}

/// M(n) by summing the trial-division mobius values.
inline std::int64_t mertens(u64 n) {
  std::int64_t m = 0;
  for (u64 k = 1; k <= n; ++k) m += mobius(k);
  return m;
}

/// f * g at n by enumerating divisors.
template <class F, class G>
double convolve_at(u64 n, F f, G g) {
  double s = 0;
  for (u64 d = 1; d <= n; ++d)
    if (n % d == 0) s += f(d) * g(n / d);
  return s;
}

/// F(x) = sum_{n<=x} mu(n) log(x/n), directly.
inline double big_f(double x) {
  double s = 0;
  for (u64 n = 1; static_cast<double>(n) <= x; ++n) s += mobius(n) * std::log(x / static_cast<double>(n));
  return s;
}

}  // namespace oracle
