#include "mlab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mlab/compensated.hpp"
#include "mlab/errors.hpp"
#include "mlab/format.hpp"

namespace mlab {

namespace {

double log_clamped(double x) { return std::log(std::max(x, std::numbers::e)); }

void require_table_range(const PrefixSums& sums, double x, double min_x, const char* what) {
  if (!(x >= min_x)) {
    throw RangeError(std::string(what) + ": argument " + format_double(x) + " below " + format_double(min_x));
  }
  if (x > static_cast<double>(sums.n_max())) {
    throw CapabilityError(std::string(what) + ": argument " + format_double(x) + " exceeds n_max " +
                              std::to_string(sums.n_max()),
                          static_cast<double>(sums.n_max()));
  }
}

// Samples of one profile kind at the given native coordinates, all within
// y <= y_top.
HProfile sweep_profile(const PrefixSums& sums, ProfileKind kind, std::span<const double> ts, double y_top) {
  const u64 y_max = std::min<u64>(sums.n_max(), static_cast<u64>(std::floor(y_top)) + 1);
  // The source only borrows the sums; the caller keeps them alive.
  std::shared_ptr<const PrefixSums> alias(std::shared_ptr<const PrefixSums>{}, &sums);
  auto source = std::make_shared<PrefixProfileSource>(alias, kind, y_max);
  HProfile p = build_profile(source, ts);
  p.source.reset();
  return p;
}

}  // namespace

TestFunction test_function_one() {
  return {"one", [](double) { return 1.0; },
          [](double y) { return std::log(y) * std::floor(y); }};
}

TestFunction test_function_log() {
  return {"log", [](double y) { return std::log(y); },
          [](double y) {
            const double l = std::log(y);
            const u64 k = static_cast<u64>(std::floor(y));
            return l * (static_cast<double>(k) * l - sum_log_range(1, k));
          }};
}

TestFunction test_function_big_f(const PrefixSums& sums) {
  return {"F", [&sums](double y) { return sums.big_f(y); }, [&sums](double y) { return sums.g_weighted(y); }};
}

TestFunction test_function_by_name(std::string_view name, const PrefixSums& sums) {
  if (name == "one") return test_function_one();
  if (name == "log") return test_function_log();
  if (name == "F") return test_function_big_f(sums);
  throw PreconditionError("unknown test function '" + std::string(name) + "' (expected one, log or F)");
}

double g_direct(const std::function<double(double)>& f, double y) {
  if (!(y >= 1.0)) throw RangeError("g_direct: y must be >= 1");
  const u64 k = static_cast<u64>(std::floor(y));
  CompensatedSum s;
  for (u64 m = 1; m <= k; ++m) s.add(f(y / static_cast<double>(m)));
  return std::log(y) * s.value();
}

IdentityResidual check_tatuzawa_iseki(const PrefixSums& sums, double x, const TestFunction& fn) {
  require_table_range(sums, x, 2.0, "check_tatuzawa_iseki");
  const u64 k = static_cast<u64>(std::floor(x));
  const SieveTable& t = sums.sieve();
  CompensatedSum lhs, rhs;
  lhs.add(fn.f(x) * std::log(x));
  for (u64 n = 2; n <= k; ++n) {
    if (t.lambda[n] != 0.0) lhs.add(fn.f(x / static_cast<double>(n)) * t.lambda[n]);
  }
  for (u64 d = 1; d <= k; ++d) {
    const int mu = t.mu[d];
    if (mu == 0) continue;
    const double y = x / static_cast<double>(d);
    const double g = fn.g ? fn.g(y) : g_direct(fn.f, y);
    rhs.add(mu * g);
  }
  return {lhs.value(), rhs.value(), lhs.value() - rhs.value()};
}

FSumResult check_f_sum_identity(const PrefixSums& sums, double x) {
  require_table_range(sums, x, 1.0, "check_f_sum_identity");
  const double s = sums.f_sum(x);
  return {s, s - std::log(x)};
}

FloorWeighted floor_weighted_mu_sum(const PrefixSums& sums, double x) {
  require_table_range(sums, x, 2.0, "floor_weighted_mu_sum");
  const u64 k = static_cast<u64>(std::floor(x));
  const double log_x = std::log(x);
  const SieveTable& t = sums.sieve();
  CompensatedSum s;
  for (u64 n = 1; n <= k; ++n) {
    if (t.mu[n] == 0) continue;
    const double q = std::floor(x / static_cast<double>(n));
    s.add(t.mu[n] * q * (log_x - std::log(static_cast<double>(n))));
  }
  FloorWeighted out;
  out.value = s.value();
  out.log_x = log_x;
  out.psi = sums.psi(x);
  out.residual = out.value - (log_x + out.psi);
  return out;
}

double h_abs_integral(const PrefixSums& sums, double y, ProfileKind kind) {
  require_table_range(sums, y, 1.0, "h_abs_integral");
  const u64 k0 = static_cast<u64>(std::floor(y));
  const double t_end = std::log(y);
  CompensatedSum total;
  sums.for_each(1, k0, [&](u64 k, const PrefixPoint& p) {
    Piece piece;
    piece.t_lo = std::log(static_cast<double>(k));
    piece.t_hi = k < k0 ? std::log(static_cast<double>(k + 1)) : t_end;
    if (kind == ProfileKind::smoothed) {
      piece.shape = ExpLinearShape{static_cast<double>(p.M), -p.A};
    } else {
      piece.shape = ExpLinearShape{0.0, static_cast<double>(p.M)};
    }
    total.add(piece_abs_integral(piece, piece.t_lo, piece.t_hi));
  });
  return total.value();
}

double check_lemma1_smoothed(const PrefixSums& sums, double x) {
  require_table_range(sums, x, 2.0, "check_lemma1_smoothed");
  const double l = std::log(x);
  const double f = sums.big_f(x);
  // 2 int_1^x |F(x/t)| log(x/t) dt = x int_0^{(log x)^2} |H|.
  const double twice_integral = x * h_abs_integral(sums, x, ProfileKind::smoothed);
  return (std::fabs(f) * l * l - twice_integral) / (x * l);
}

double check_lemma1_h(const PrefixSums& sums, double x, ProfileKind kind) {
  if (!(x >= 0.0)) throw RangeError("check_lemma1_h: x must be >= 0");
  x = std::max(x, kXMin);
  const double cap = std::pow(std::log(static_cast<double>(sums.n_max())), 2);
  const double s = std::sqrt(x);
  const double y = std::min(std::exp(s), static_cast<double>(sums.n_max()));
  if (std::exp(s) > static_cast<double>(sums.n_max()) * (1.0 + 1e-12)) {
    throw CapabilityError("check_lemma1_h: e^sqrt(x) exceeds n_max; max usable x is " + format_double(cap), cap);
  }
  const double h = kind == ProfileKind::smoothed ? sums.h_smoothed(y) : sums.h_mertens(y);
  const double avg = h_abs_integral(sums, y, kind) / x;
  const double r = std::fabs(h) - avg;
  return kind == ProfileKind::smoothed ? r * s : r;
}

std::string_view kind_name(RemainderKind kind) {
  switch (kind) {
    case RemainderKind::selberg_eq3: return "selberg_eq3";
    case RemainderKind::lambda_theta_eq4: return "lambda_theta_eq4";
    case RemainderKind::f_floor_eq5: return "f_floor_eq5";
    case RemainderKind::logsq_eq9: return "logsq_eq9";
    case RemainderKind::lambda_over_n: return "lambda_over_n";
    case RemainderKind::lemma1_smoothed_eq18: return "lemma1_smoothed_eq18";
    case RemainderKind::lemma1_h_eq7: return "lemma1_h_eq7";
    case RemainderKind::corollary_h_eq24: return "corollary_h_eq24";
  }
  return "unknown";
}

RemainderKind parse_kind(std::string_view name) {
  for (RemainderKind k : kAllRemainderKinds) {
    if (kind_name(k) == name) return k;
  }
  throw PreconditionError("unknown remainder kind '" + std::string(name) + "'");
}

std::string_view normalization_name(RemainderKind kind) {
  switch (kind) {
    case RemainderKind::selberg_eq3: return "x";
    case RemainderKind::lambda_theta_eq4: return "x/log x";
    case RemainderKind::f_floor_eq5: return "log x";
    case RemainderKind::logsq_eq9: return "(log x)^2";
    case RemainderKind::lambda_over_n: return "1";
    case RemainderKind::lemma1_smoothed_eq18: return "x log x";
    case RemainderKind::lemma1_h_eq7: return "1/sqrt(x)";
    case RemainderKind::corollary_h_eq24: return "1";
  }
  return "";
}

bool profile_domain(RemainderKind kind) {
  return kind == RemainderKind::lemma1_h_eq7 || kind == RemainderKind::corollary_h_eq24;
}

double kind_cap(const PrefixSums& sums, RemainderKind kind) {
  switch (kind) {
    case RemainderKind::selberg_eq3:
    case RemainderKind::lambda_theta_eq4: return static_cast<double>(sums.conv_cap());
    case RemainderKind::lemma1_h_eq7:
    case RemainderKind::corollary_h_eq24: return std::pow(std::log(static_cast<double>(sums.n_max())), 2);
    default: return static_cast<double>(sums.n_max());
  }
}

double kind_min_x(RemainderKind kind) {
  switch (kind) {
    case RemainderKind::lambda_over_n:
    case RemainderKind::lemma1_smoothed_eq18: return 2.0;
    case RemainderKind::lemma1_h_eq7:
    case RemainderKind::corollary_h_eq24: return 0.0;
    default: return 1.0;
  }
}

RemainderSeries remainder_series(const PrefixSums& sums, RemainderKind kind, std::span<const double> xs_in) {
  std::vector<double> xs(xs_in.begin(), xs_in.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  RemainderSeries out;
  out.kind = kind;
  out.normalization = std::string(normalization_name(kind));
  out.cap = kind_cap(sums, kind);
  if (xs.empty()) return out;
  const double min_x = kind_min_x(kind);
  if (!(xs.front() >= min_x)) {
    throw RangeError(std::string(kind_name(kind)) + ": sample " + format_double(xs.front()) + " below " +
                     format_double(min_x));
  }
  if (xs.back() > out.cap) {
    throw CapabilityError(std::string(kind_name(kind)) + ": sample " + format_double(xs.back()) +
                              " exceeds the cap " + format_double(out.cap),
                          out.cap);
  }
  out.samples.reserve(xs.size());
  auto push = [&](double x, double raw, double normalized) { out.samples.push_back({x, raw, normalized}); };

  switch (kind) {
    case RemainderKind::selberg_eq3:
      for (double x : xs) {
        const double raw = sums.sum_lambda2(x) - 2.0 * x * std::log(x);
        push(x, raw, raw / x);
      }
      break;
    case RemainderKind::lambda_theta_eq4:
      for (double x : xs) {
        const double raw = sums.psi(x) + sums.sum_theta(x) - 2.0 * x;
        push(x, raw, raw * log_clamped(x) / x);
      }
      break;
    case RemainderKind::f_floor_eq5:
      for (double x : xs) {
        const double raw = sums.f_sum(x);
        push(x, raw, raw / log_clamped(x));
      }
      break;
    case RemainderKind::logsq_eq9: {
      // One pass over n: sum (L - log n)^2 = k L^2 - 2 L S1 + S2.
      CompensatedSum s1, s2;
      u64 n = 0;
      for (double x : xs) {
        const u64 k = static_cast<u64>(std::floor(x));
        for (; n < k;) {
          ++n;
          const double l = std::log(static_cast<double>(n));
          s1.add(l);
          s2.add(l * l);
        }
        const double big_l = std::log(x);
        CompensatedSum v;
        v.add(static_cast<double>(k) * big_l * big_l);
        v.add(-2.0 * big_l * s1.raw_sum());
        v.add(-2.0 * big_l * s1.compensation());
        v.add(s2.raw_sum());
        v.add(s2.compensation());
        v.add(-2.0 * x);
        const double raw = v.value();
        const double norm = log_clamped(x);
        push(x, raw, raw / (norm * norm));
      }
      break;
    }
    case RemainderKind::lambda_over_n: {
      const SieveTable& t = sums.sieve();
      CompensatedSum s;
      u64 n = 1;
      for (double x : xs) {
        const u64 k = static_cast<u64>(std::floor(x));
        for (; n < k;) {
          ++n;
          if (t.lambda[n] != 0.0) s.add(t.lambda[n] / static_cast<double>(n));
        }
        const double raw = s.value() - std::log(x);
        push(x, raw, raw);
      }
      break;
    }
    case RemainderKind::lemma1_smoothed_eq18: {
      std::vector<double> ts;
      for (double x : xs) ts.push_back(std::log(x));
      const HProfile p = sweep_profile(sums, ProfileKind::smoothed, ts, xs.back());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i], l = ts[i];
        const double raw = std::fabs(sums.big_f(x)) * l * l - x * p.cumulative_abs_integral[i];
        push(x, raw, raw / (x * l));
      }
      break;
    }
    case RemainderKind::lemma1_h_eq7:
    case RemainderKind::corollary_h_eq24: {
      const ProfileKind pk =
          kind == RemainderKind::lemma1_h_eq7 ? ProfileKind::smoothed : ProfileKind::mertens;
      std::vector<double> ts, xe;
      for (double x : xs) {
        xe.push_back(std::max(x, kXMin));
        ts.push_back(std::sqrt(xe.back()));
      }
      // Clamping can merge leading samples; the sweep takes them in order.
      // x at the cap maps back to n_max only up to rounding.
      const double y_top = std::min(std::exp(ts.back()), static_cast<double>(sums.n_max()));
      if (std::exp(ts.back()) > static_cast<double>(sums.n_max()) * (1.0 + 1e-12)) {
        throw CapabilityError(std::string(kind_name(kind)) + ": e^sqrt(x) exceeds n_max; max usable x is " +
                                  format_double(out.cap),
                              out.cap);
      }
      const HProfile p = sweep_profile(sums, pk, ts, y_top);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y = std::min(std::exp(ts[i]), y_top);
        const double h = pk == ProfileKind::smoothed ? sums.h_smoothed(y) : sums.h_mertens(y);
        const double raw = std::fabs(h) - p.cumulative_abs_integral[i] / xe[i];
        push(xs[i], raw, pk == ProfileKind::smoothed ? raw * ts[i] : raw);
      }
      break;
    }
  }

  for (const RemainderSample& s : out.samples) {
    const double a = std::fabs(s.normalized);
    if (std::isnan(out.argmax_x) || a > out.sup_normalized) {
      out.sup_normalized = a;
      out.argmax_x = s.x;
    }
  }
  return out;
}

std::vector<WindowSup> decade_sups(const RemainderSeries& series, int k_lo) {
  std::vector<WindowSup> out;
  if (series.samples.empty()) return out;
  const double last = series.samples.back().x;
  for (int k = k_lo;; ++k) {
    const double lo = std::pow(10.0, k), hi = std::pow(10.0, k + 1);
    if (lo >= last) break;
    WindowSup w;
    w.k = k;
    for (const RemainderSample& s : series.samples) {
      if (s.x < lo || s.x > hi) continue;
      const double a = std::fabs(s.normalized);
      if (w.count == 0 || a > w.sup) {
        w.sup = a;
        w.argmax_x = s.x;
      }
      ++w.count;
    }
    out.push_back(w);
  }
  return out;
}

double max_decade_growth(std::span<const WindowSup> sups) {
  double worst = kNaN;
  for (std::size_t i = 1; i < sups.size(); ++i) {
    if (sups[i - 1].count == 0 || sups[i].count == 0) continue;
    const double ratio = sups[i - 1].sup > 0.0 ? sups[i].sup / sups[i - 1].sup
                                               : (sups[i].sup > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    worst = std::isnan(worst) ? ratio : std::max(worst, ratio);
  }
  return worst;
}

void write_series_csv(std::ostream& out, const RemainderSeries& series, bool header) {
  if (header) out << "kind,x,raw,normalized\n";
  for (const RemainderSample& s : series.samples) {
    out << kind_name(series.kind) << ',' << format_double(s.x) << ',' << format_double(s.raw) << ','
        << format_double(s.normalized) << '\n';
  }
}

}  // namespace mlab
