#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlab/h_analysis.hpp"
#include "mlab/summatory.hpp"

namespace mlab {

/// A test function F for the Tatuzawa-Iseki identity.  `g`, when present,
/// evaluates G(y) = log y * sum_{m<=y} F(y/m) faster than the direct sum.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> g;
};

TestFunction test_function_one();
TestFunction test_function_log();
/// F = the smoothed sum itself, with G from the block evaluation.
TestFunction test_function_big_f(const PrefixSums& sums);
/// "one", "log" or "F"; PreconditionError otherwise.
TestFunction test_function_by_name(std::string_view name, const PrefixSums& sums);

/// G(y) = log y * sum_{m<=y} F(y/m), summed directly.
double g_direct(const std::function<double(double)>& f, double y);

struct IdentityResidual {
  double lhs = 0;
  double rhs = 0;
  double residual = 0;  ///< lhs - rhs
};

/// [F(x) log x + sum_{n<=x} F(x/n) Lambda(n)] - sum_{d<=x} mu(d) G(x/d).
IdentityResidual check_tatuzawa_iseki(const PrefixSums& sums, double x, const TestFunction& fn);

/// sum = sum_{n<=x} F(x/n), residual = sum - log x.
struct FSumResult {
  double sum = 0;
  double residual = 0;
};
FSumResult check_f_sum_identity(const PrefixSums& sums, double x);

/// value = sum_{n<=x} mu(n) floor(x/n) log(x/n), compared with log x + psi(x).
struct FloorWeighted {
  double value = 0;
  double log_x = 0;
  double psi = 0;
  double residual = 0;  ///< value - (log x + psi)
};
FloorWeighted floor_weighted_mu_sum(const PrefixSums& sums, double x);

/// int_0^{(log y)^2} |H(s)| ds for the chosen profile, in piecewise closed form.
double h_abs_integral(const PrefixSums& sums, double y, ProfileKind kind);

/// (|F(x)| (log x)^2 - 2 int_1^x |F(x/t)| log(x/t) dt) / (x log x).
double check_lemma1_smoothed(const PrefixSums& sums, double x);

/// |H(x)| - (1/x) int_0^x |H|, times sqrt(x) for the smoothed kind.  x is in
/// the profile domain; below kXMin it is treated as kXMin.
double check_lemma1_h(const PrefixSums& sums, double x, ProfileKind kind);

enum class RemainderKind {
  selberg_eq3,
  lambda_theta_eq4,
  f_floor_eq5,
  logsq_eq9,
  lambda_over_n,
  lemma1_smoothed_eq18,
  lemma1_h_eq7,
  corollary_h_eq24,
};

inline constexpr RemainderKind kAllRemainderKinds[] = {
    RemainderKind::selberg_eq3,          RemainderKind::lambda_theta_eq4, RemainderKind::f_floor_eq5,
    RemainderKind::logsq_eq9,            RemainderKind::lambda_over_n,    RemainderKind::lemma1_smoothed_eq18,
    RemainderKind::lemma1_h_eq7,         RemainderKind::corollary_h_eq24,
};

std::string_view kind_name(RemainderKind kind);
/// PreconditionError for unknown names.
RemainderKind parse_kind(std::string_view name);
std::string_view normalization_name(RemainderKind kind);
/// True for kinds whose x lives in the profile domain x = (log y)^2.
bool profile_domain(RemainderKind kind);
/// Largest admissible x for the kind given the tables behind `sums`.
double kind_cap(const PrefixSums& sums, RemainderKind kind);
double kind_min_x(RemainderKind kind);

struct RemainderSample {
  double x = 0;
  double raw = 0;
  double normalized = 0;
};

struct RemainderSeries {
  RemainderKind kind = RemainderKind::selberg_eq3;
  std::vector<RemainderSample> samples;
  std::string normalization;
  double sup_normalized = 0;
  double argmax_x = kNaN;
  double cap = 0;
};

/// Samples are sorted and deduplicated.  Arguments beyond the kind's cap
/// throw CapabilityError naming the cap; below the minimum, RangeError.
RemainderSeries remainder_series(const PrefixSums& sums, RemainderKind kind, std::span<const double> xs);

struct WindowSup {
  int k = 0;             ///< window [10^k, 10^{k+1}]
  double sup = 0;        ///< max |normalized| over samples in the window
  double argmax_x = 0;
  std::size_t count = 0;
};

/// Per-decade sups of |normalized| for k = k_lo.. while 10^k < the last sample.
std::vector<WindowSup> decade_sups(const RemainderSeries& series, int k_lo);
/// Largest ratio sup_{k+1} / sup_k over consecutive windows (NaN if fewer than two).
double max_decade_growth(std::span<const WindowSup> sups);

/// CSV `kind,x,raw,normalized`.
void write_series_csv(std::ostream& out, const RemainderSeries& series, bool header = true);

}  // namespace mlab
