#include "mlab/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "mlab/compensated.hpp"
#include "mlab/errors.hpp"
#include "mlab/format.hpp"

namespace mlab {

std::vector<double> convolve_prefix(std::span<const double> f, std::span<const double> g, u64 n_max,
                                    unsigned threads) {
  if (n_max == 0) throw RangeError("convolve_prefix: n_max must be >= 1");
  if (f.size() <= n_max || g.size() <= n_max) {
    throw PreconditionError("convolve_prefix: inputs must be defined on [1, n_max]");
  }
  std::vector<CompensatedSum> acc(n_max + 1);

  // Every output n in [lo, hi) collects its terms in ascending d, whatever the
  // block boundaries are.
  auto block = [&](u64 lo, u64 hi) {
    for (u64 d = 1; d < hi; ++d) {
      const double fd = f[d];
      if (fd == 0.0) continue;
      const u64 m_first = std::max<u64>(1, (lo + d - 1) / d);
      const u64 m_last = (hi - 1) / d;
      for (u64 m = m_first; m <= m_last; ++m) {
        const double gm = g[m];
        if (gm == 0.0) continue;
        acc[d * m].add(fd * gm);
      }
    }
  };

  threads = static_cast<unsigned>(std::clamp<u64>(threads, 1, n_max));
  if (threads == 1) {
    block(1, n_max + 1);
  } else {
    std::vector<std::jthread> pool;
    const u64 chunk = (n_max + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const u64 lo = 1 + t * chunk;
      const u64 hi = std::min(n_max + 1, lo + chunk);
      if (lo < hi) pool.emplace_back(block, lo, hi);
    }
  }

  std::vector<double> out(n_max + 1, 0.0);
  for (u64 n = 1; n <= n_max; ++n) out[n] = acc[n].value();
  return out;
}

ArithTable build_arith_table(const SieveTable& sieve, u64 n_max, Lambda2Method method,
                             const Tolerances& tol, unsigned threads) {
  if (n_max == 0) throw RangeError("build_arith_table: n_max must be >= 1");
  if (n_max > sieve.n_max) {
    throw CapabilityError("build_arith_table: n_max exceeds the sieve cap " +
                              std::to_string(sieve.n_max),
                          static_cast<double>(sieve.n_max));
  }

  ArithTable t;
  t.n_max = n_max;
  t.method = method;
  t.mu.assign(sieve.mu.begin(), sieve.mu.begin() + static_cast<std::ptrdiff_t>(n_max + 1));
  t.lambda.assign(sieve.lambda.begin(), sieve.lambda.begin() + static_cast<std::ptrdiff_t>(n_max + 1));

  std::vector<double> log_n(n_max + 1, 0.0);
  for (u64 n = 1; n <= n_max; ++n) log_n[n] = std::log(static_cast<double>(n));

  t.lambda_star_lambda = convolve_prefix(t.lambda, t.lambda, n_max, threads);
  std::vector<double> selberg(n_max + 1, 0.0);
  t.lambda2_minus.assign(n_max + 1, 0.0);
  t.theta.assign(n_max + 1, 0.0);
  for (u64 n = 1; n <= n_max; ++n) {
    const double lam_log = t.lambda[n] * log_n[n];
    selberg[n] = t.lambda_star_lambda[n] + lam_log;
    t.lambda2_minus[n] = t.lambda_star_lambda[n] - lam_log;
    if (n >= 2) t.theta[n] = t.lambda_star_lambda[n] / log_n[n];
  }

  if (method == Lambda2Method::selberg) {
    t.lambda2 = std::move(selberg);
    return t;
  }

  std::vector<double> mu_d(n_max + 1, 0.0), log_sq(n_max + 1, 0.0);
  for (u64 n = 1; n <= n_max; ++n) {
    mu_d[n] = t.mu[n];
    log_sq[n] = log_n[n] * log_n[n];
  }
  std::vector<double> mobius = convolve_prefix(mu_d, log_sq, n_max, threads);

  if (method == Lambda2Method::mobius) {
    t.lambda2 = std::move(mobius);
    return t;
  }

  t.max_form_discrepancy = 0.0;
  t.worst_n = 1;
  for (u64 n = 1; n <= n_max; ++n) {
    const double diff = std::fabs(mobius[n] - selberg[n]);
    if (diff > t.max_form_discrepancy) {
      t.max_form_discrepancy = diff;
      t.worst_n = n;
    }
  }
  t.lambda2 = std::move(selberg);
  const double limit = tol.rel * log_n[n_max] * log_n[n_max];
  if (t.max_form_discrepancy > limit) {
    throw CrossCheckError("Lambda2 forms disagree at n=" + std::to_string(t.worst_n) + " by " +
                              format_double(t.max_form_discrepancy) + " (limit " +
                              format_double(limit) + ")",
                          t.worst_n, t.max_form_discrepancy);
  }
  return t;
}

ArithTable build_arith_table(u64 n_max, Lambda2Method method, const Tolerances& tol) {
  SieveOptions opts;
  opts.threads = 1;
  const SieveTable sieve = sieve_table(n_max, opts);
  return build_arith_table(sieve, n_max, method, tol);
}

PointwiseResiduals pointwise_residuals_13_14(const ArithTable& table, double x) {
  if (!(x >= 2.0)) throw RangeError("pointwise_residuals_13_14: x must be >= 2");
  if (x > static_cast<double>(table.n_max)) {
    throw CapabilityError("pointwise_residuals_13_14: x exceeds the table cap",
                          static_cast<double>(table.n_max));
  }
  const u64 k = static_cast<u64>(std::floor(x));
  const double log_x = std::log(x);
  PointwiseResiduals r;
  r.x = x;
  CompensatedSum sum13, sum14, sum_abs13;
  for (u64 n = 1; n <= k; ++n) {
    const double log_n = std::log(static_cast<double>(n));
    const double r13 = 2.0 * table.lambda[n] * (log_x - log_n) - std::fabs(table.lambda2_minus[n]);
    const double r13_norm = std::fabs(r13) / std::log(static_cast<double>(n) + 1.0);
    const double r14 = 2.0 * log_n - table.lambda2[n];
    sum13.add(r13);
    sum14.add(r14);
    sum_abs13.add(r13_norm);
    r.max_abs_r13_normalized = std::max(r.max_abs_r13_normalized, r13_norm);
    if (std::fabs(r14) > r.max_abs_r14) {
      r.max_abs_r14 = std::fabs(r14);
      r.argmax_r14 = n;
    }
  }
  r.mean_abs_r13_normalized = sum_abs13.value() / static_cast<double>(k);
  r.avg_r13 = sum13.value() / x;
  r.avg_r14 = sum14.value() / x;
  return r;
}

void write_arith_csv(std::ostream& out, const ArithTable& t, std::span<const u64> rows) {
  out << "n,mu,lambda,lambda2,lambda2_minus,theta\n";
  auto row = [&](u64 n) {
    out << n << ',' << static_cast<int>(t.mu[n]) << ',' << format_double(t.lambda[n]) << ','
        << format_double(t.lambda2[n]) << ',' << format_double(t.lambda2_minus[n]) << ','
        << format_double(t.theta[n]) << '\n';
  };
  if (rows.empty()) {
    for (u64 n = 1; n <= t.n_max; ++n) row(n);
  } else {
    for (u64 n : rows) {
      if (n == 0 || n > t.n_max) throw RangeError("write_arith_csv: row outside [1, n_max]");
      row(n);
    }
  }
}

std::string_view method_name(Lambda2Method m) {
  switch (m) {
    case Lambda2Method::selberg: return "selberg-form";
    case Lambda2Method::mobius: return "mobius-form";
    case Lambda2Method::both: return "both";
  }
  return "?";
}

}  // namespace mlab
