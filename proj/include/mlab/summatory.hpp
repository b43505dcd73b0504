#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "mlab/compensated.hpp"
#include "mlab/dirichlet.hpp"
#include "mlab/sieve.hpp"

namespace mlab {

struct PrefixOptions {
  u64 checkpoint_stride = u64{1} << 16;
  /// Arguments up to this bound are answered from dense arrays.  Rounded up
  /// to a multiple of the stride.
  u64 dense_limit = u64{1} << 20;
};

/// Running sums at an integer k.
struct PrefixPoint {
  i64 M = 0;        ///< sum_{n<=k} mu(n), exact
  double A = 0;     ///< sum_{n<=k} mu(n) log n
  double psi = 0;   ///< sum_{n<=k} Lambda(n)
  double I = 0;     ///< int_1^k M(y)/y dy = sum_{n<k} M(n) log((n+1)/n)
};

struct ValueRemainder {
  double value = 0;
  double remainder = 0;
};

/// Checkpointed prefix sums of the sieved functions and the smoothed sums
/// built from them.
///
/// Sums are accumulated once in ascending n with compensated addition.  The
/// full accumulator state is stored every `checkpoint_stride` integers; a
/// query above the dense range replays the sieve data from the checkpoint
/// at or below it, which reproduces the sequential accumulation bit for bit.
/// All queries are const and safe to call concurrently.
class PrefixSums {
 public:
  PrefixSums(std::shared_ptr<const SieveTable> sieve, std::shared_ptr<const ArithTable> conv = nullptr,
             PrefixOptions options = {});

  u64 n_max() const { return sieve_->n_max; }
  /// Largest argument for the Theta / Lambda2 sums (0 without a table).
  u64 conv_cap() const { return conv_ ? conv_->n_max : 0; }
  u64 checkpoint_stride() const { return stride_; }
  const SieveTable& sieve() const { return *sieve_; }
  const ArithTable* conv() const { return conv_.get(); }

  PrefixPoint at(u64 k) const;

  /// M(floor(x)), exact.
  i64 mertens(double x) const;
  double sum_mu_log(double x) const;
  double psi(double x) const;
  double sum_theta(double x) const;
  double sum_lambda2(double x) const;

  /// F(x) = sum_{n<=x} mu(n) log(x/n), as M(floor x) log x - A(floor x).
  double big_f(double x) const;
  /// F(x) as the integral of M(y)/y over [1, x], in piecewise closed form.
  double big_f_integral(double x) const;
  /// F(y)/y; this is the smoothed profile at x = (log y)^2.
  double h_smoothed(double y) const;
  /// M(y)/y; the raw Mertens profile at x = (log y)^2.
  double h_mertens(double y) const;

  /// sum_{n<=x} F(x/n), grouping n by the O(sqrt x) distinct floor(x/n).
  double f_sum(double x) const;
  /// G(x) = log x * sum_{n<=x} F(x/n).
  double g_weighted(double x) const;

  /// value = sum_{n<=x} (log(x/n))^2, remainder = value - 2x.
  ValueRemainder log_square_sum(double x) const;
  /// value = sum_{n<=x} Lambda(n)/n, remainder = value - log x.
  ValueRemainder lambda_over_n_sum(double x) const;

  /// Running sums at each k of an ascending list, from one sweep.
  std::vector<PrefixPoint> at_sorted(std::span<const u64> ks) const;

  /// The two routes to F(x) given the running sums at k = floor(x).
  static double big_f_at(const PrefixPoint& p, double x);
  static double big_f_integral_at(const PrefixPoint& p, u64 k, double x);

  /// Visits k = lo..hi (inclusive) in order with the running sums at k.
  void for_each(u64 lo, u64 hi, const std::function<void(u64, const PrefixPoint&)>& fn) const;

 private:
  struct State {
    i64 M = 0;
    CompensatedSum A, psi, I;
    void step(u64 n, int mu, double lambda);
    PrefixPoint point() const { return {M, A.value(), psi.value(), I.value()}; }
  };
  struct ConvState {
    CompensatedSum theta, lambda2;
  };

  u64 checked_floor(double x, double min_x, const char* what) const;
  State replay(u64 k) const;
  ConvState conv_at(u64 k) const;

  std::shared_ptr<const SieveTable> sieve_;
  std::shared_ptr<const ArithTable> conv_;
  u64 stride_;
  u64 dense_limit_;
  std::vector<i64> dense_M_;
  std::vector<double> dense_A_, dense_psi_, dense_I_;
  std::vector<State> checkpoints_;       // state after n = c * stride
  std::vector<ConvState> conv_checkpoints_;
};

/// sum_{n=a}^{b} log n for 1 <= a <= b + 1 (empty range gives 0).
double sum_log_range(u64 a, u64 b);

/// x = (log y)^2 and its inverse y = e^{sqrt x}.
double x_from_y(double y);
double y_from_x(double x);

/// CSV `x,M,F_sum,F_integral,psi,S_lambda2`.  S_lambda2 is left empty where
/// x exceeds the convolution cap.
void write_summatory_csv(std::ostream& out, const PrefixSums& sums, std::span<const double> xs);

}  // namespace mlab
