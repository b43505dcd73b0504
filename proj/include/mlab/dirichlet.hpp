#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "mlab/sieve.hpp"

namespace mlab {

struct Tolerances {
  double rel = 1e-9;
  double abs = 1e-9;
};

/// Dirichlet convolution (f*g)(n) = sum_{d|n} f(d) g(n/d) for 1 <= n <= n_max.
///
/// Inputs are indexed by n (index 0 ignored) and must hold at least n_max + 1
/// entries.  Each output entry receives its terms in ascending d with
/// compensated accumulation; work is split over blocks of n, so the result is
/// identical for any thread count.
std::vector<double> convolve_prefix(std::span<const double> f, std::span<const double> g, u64 n_max,
                                    unsigned threads = 1);

enum class Lambda2Method { selberg, mobius, both };

/// Dense arithmetic functions on [1, n_max], index 0 unused.
struct ArithTable {
  u64 n_max = 0;
  std::vector<std::int8_t> mu;
  std::vector<double> lambda;
  /// (Lambda * Lambda)(n).
  std::vector<double> lambda_star_lambda;
  std::vector<double> lambda2;
  /// (Lambda * Lambda)(n) - Lambda(n) log n.
  std::vector<double> lambda2_minus;
  /// (Lambda * Lambda)(n) / log n, with theta(1) = 0.
  std::vector<double> theta;
  Lambda2Method method = Lambda2Method::selberg;
  /// Filled for method == both: max |mobius form - selberg form| and where.
  double max_form_discrepancy = std::numeric_limits<double>::quiet_NaN();
  u64 worst_n = 0;
};

/// Builds the table from the prefix [1, n_max] of a sieve table.  With
/// method == both the stored lambda2 is the Selberg form and a discrepancy
/// above tol.rel * (log n_max)^2 throws CrossCheckError naming the worst n.
ArithTable build_arith_table(const SieveTable& sieve, u64 n_max, Lambda2Method method,
                             const Tolerances& tol = {}, unsigned threads = 1);

/// Convenience overload that sieves [1, n_max] itself.
ArithTable build_arith_table(u64 n_max, Lambda2Method method, const Tolerances& tol = {});

/// Residual statistics for the pointwise forms
///   r13(n) = 2 Lambda(n) log(x/n) - |Lambda2^-(n)|   (normalized by log(n+1))
///   r14(n) = 2 log n - Lambda2(n)
/// over 1 <= n <= x.
struct PointwiseResiduals {
  double x = 0;
  double max_abs_r13_normalized = 0;
  double mean_abs_r13_normalized = 0;
  double avg_r13 = 0;  ///< (1/x) sum r13(n)
  double max_abs_r14 = 0;
  u64 argmax_r14 = 0;
  double avg_r14 = 0;  ///< (1/x) sum r14(n)
};

PointwiseResiduals pointwise_residuals_13_14(const ArithTable& table, double x);

/// CSV with header `n,mu,lambda,lambda2,lambda2_minus,theta`.  Rows are the
/// given n values (ascending), or every n when `rows` is empty.
void write_arith_csv(std::ostream& out, const ArithTable& table, std::span<const u64> rows = {});

std::string_view method_name(Lambda2Method m);

}  // namespace mlab
