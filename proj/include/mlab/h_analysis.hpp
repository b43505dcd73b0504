#pragma once

#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "mlab/piecewise.hpp"
#include "mlab/summatory.hpp"

namespace mlab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ZeroPoint {
  double x = 0;
  double t = 0;  ///< native coordinate of the source
  /// The sign changed across a jump (step-function profiles); the position
  /// is the left end of the new step.
  bool at_jump = false;
  double cum_signed = 0;  ///< int_0^x H
  double cum_abs = 0;     ///< int_0^x |H|
};

/// Statistics of H between successive zeros a < b (x coordinates).
struct ZeroInterval {
  double a = 0;
  double b = 0;
  double integral_abs = 0;
  /// Mean-value point: |H(xi)| = integral_abs / (b - a) where H is
  /// continuous; for jump profiles the closest crossing found.
  double xi = kNaN;
  double h_at_xi = 0;
  /// (1/2) m (b - a)^2 with m the sup of |H'| over [a, b].
  double prop4_bound = 0;
  /// alpha_hat (b - a) (1 - kappa h_at_xi); NaN when kappa is not applicable.
  double lemma2_rhs = kNaN;
  double max_abs_h = 0;
  double local_m = 0;
  double t_a = 0, t_b = 0, t_at_max = 0;
};

struct ConstantEstimates {
  double alpha_hat = 0;   ///< sup |H| over the tail window
  double ell_hat = 0;     ///< sup |H| over the last tail_fraction of the tail window
  double L_hat = 0;       ///< (1/x_max) int_0^{x_max} |H|
  double m_hat = 0;       ///< sup |H'| over the whole profile
  double M_hat = 0;       ///< max - min of int_0^x H over samples and zeros
  double iota_hat = kNaN; ///< min over intervals of h_at_xi
  double kappa = kNaN;
  double epsilon = kNaN;
  double h_param = 0;
  double lambda_hat = kNaN;  ///< kappa * iota_hat
  bool kappa_applicable = false;
  /// Any bound with |H| <= alpha works; |H| <= 1 always holds for the smoothed profile.
  double alpha_trivial = 1.0;

  // provenance
  double tail_fraction = 0.5;
  double window_x_lo = 0;
  double window_x_hi = 0;
  double ell_window_x_lo = 0;
  double min_interval_width = kNaN;
  double m_hat_tail = 0;  ///< sup |H'| over the tail window only
  std::size_t window_samples = 0;
};

struct HProfile {
  ProfileKind kind = ProfileKind::smoothed;
  bool synthetic = false;
  u64 y_max = 0;
  int samples_per_decade = 0;
  std::vector<double> x_samples;
  std::vector<double> y_samples;  ///< NaN for synthetic profiles
  std::vector<double> h_values;
  std::vector<double> cumulative_abs_integral;
  std::vector<double> cumulative_signed_integral;
  /// Sup of |H| and |H'| over [x_j, x_{j+1}]; size = samples - 1.
  std::vector<double> window_max_abs_h;
  std::vector<double> window_max_abs_dh;
  std::vector<ZeroPoint> zeros;
  std::vector<ZeroInterval> intervals;  ///< without xi / lemma2_rhs until interval_stats
  ConstantEstimates constants;
  std::shared_ptr<const PieceSource> source;

  bool empty() const { return x_samples.size() < 2; }
  /// Fewer than two zeros in range: the "finitely many zeros" branch.
  bool finite_zeros_branch() const { return zeros.size() < 2; }
};

/// Profile of the smoothed or raw Mertens H for y in [1, y_max], sampled on
/// a grid geometric in y.  Integrals and zeros come from the exact piecewise
/// form over every integer step of y.  y_max = 1 yields an empty profile.
HProfile build_profile(std::shared_ptr<const PrefixSums> sums, ProfileKind kind, u64 y_max,
                       int samples_per_decade, double tail_fraction = 0.5);

/// Same machinery for an arbitrary source; samples are native coordinates.
HProfile build_profile(std::shared_ptr<const PieceSource> source, std::span<const double> sample_t,
                       double tail_fraction = 0.5);

std::vector<ZeroPoint> find_zeros(const HProfile& profile);

/// Completes the intervals with xi and lemma2_rhs = alpha (b - a)(1 - kappa h_at_xi).  Empty
/// when the profile has fewer than two zeros.
std::vector<ZeroInterval> interval_stats(const HProfile& profile, const ConstantEstimates& constants);
std::vector<ZeroInterval> interval_stats(const HProfile& profile);

struct DerivativeValue {
  double value = 0;
  /// y was an integer (a jump of M); the right limit was used.
  bool one_sided = false;
};

/// dH/dx at x = (log y)^2, from (M - F) e^{-sqrt x} / (2 sqrt x) for the
/// smoothed kind and -M e^{-sqrt x} / (2 sqrt x) for the Mertens kind.
DerivativeValue h_derivative(const PrefixSums& sums, double y, ProfileKind kind = ProfileKind::smoothed);

ConstantEstimates estimate_constants(const HProfile& profile, double tail_fraction = 0.5);

struct LambdaStep {
  int k = 0;
  double lambda_k = 0;
  double bound = 0;         ///< alpha / lambda_k, alpha held fixed
  double alpha_shrunk = 0;  ///< alpha / (1 + lambda)^k, alpha shrinking each round
};

struct LambdaIteration {
  double lambda = 0;
  double alpha = 1;
  double limit = 0;        ///< 1 / (1 - lambda)
  double bound_limit = 0;  ///< alpha (1 - lambda)
  std::vector<LambdaStep> steps;  ///< k = 0..n_steps
};

/// lambda_k = 1 + lambda lambda_{k-1}, lambda_0 = 1.  Throws DomainError
/// unless 0 < lambda < 1, RangeError unless n_steps >= 1.
LambdaIteration lambda_iteration(double lambda, int n_steps, double alpha = 1.0);

struct TailSup {
  int k = 0;
  double sup = 0;  ///< sup_{10^k <= y <= n_max} |M(y)| / y
  u64 argmax_y = 0;
};

/// Tail sups for k = k_lo..k_hi (stopping where 10^k exceeds n_max).
std::vector<TailSup> mertens_tail_sups(const PrefixSums& sums, int k_lo, int k_hi);
bool non_increasing(std::span<const TailSup> sups);

/// Synthetic profile of arches sign_i * c (x - z_i)(z_{i+1} - x) between
/// consecutive zeros, alternating in sign and starting positive.
std::shared_ptr<const VectorPieceSource> parabolic_arches(std::span<const double> zeros, double c);

void write_profile_csv(std::ostream& out, const HProfile& profile);
void write_zeros_csv(std::ostream& out, const HProfile& profile);
void write_intervals_csv(std::ostream& out, std::span<const ZeroInterval> intervals);

}  // namespace mlab
