// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// asserted criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "mlab/cli.hpp"
#include "mlab/grid.hpp"
#include "mlab/h_analysis.hpp"
#include "mlab/identities.hpp"
#include "oracle.hpp"

using namespace mlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, bool asserted = true) {
  const char* tag = pass ? "PASS" : asserted ? "FAIL" : "FAIL (data)";
  std::printf("[%s] %2d %s: %s\n", tag, id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass && asserted) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr u64 kNMax = 10'000'000;
constexpr u64 kConvCap = 1'000'000;

struct Fixture {
  std::shared_ptr<const SieveTable> sieve;
  std::shared_ptr<const ArithTable> conv;
  std::shared_ptr<const PrefixSums> sums;
};

void identity_suite(const Fixture& f) {
  const auto t0 = Clock::now();
  const double ratio = std::pow(1e5 / 2.0, 1.0 / 199.0);
  auto xs = geometric_grid(2.0, ratio, 200);
  xs.back() = 1e5;
  double worst = 0;
  for (const auto& fn : {test_function_big_f(*f.sums), test_function_one(), test_function_log()}) {
    for (double x : xs) {
      const double l = std::log(x);
      worst = std::max(worst, std::fabs(check_tatuzawa_iseki(*f.sums, x, fn).residual) / (x * l * l));
    }
  }
  const double secs = seconds_since(t0);
  report(1, "exact identity suite", worst <= 1e-9 && secs < 60.0,
         "max |residual| / (x log^2 x) = " + fmt(worst) + " (<= 1e-9) over 3 x 200 points, " + fmt(secs) + " s (< 60)");
}

void dual_forms() {
  const auto t = build_arith_table(kConvCap, Lambda2Method::both, {1.0, 1.0});
  const double bound = 1e-9 * std::pow(std::log(1e6), 2);
  const double l2 = std::log(2.0), l3 = std::log(3.0);
  double hand = 0;
  for (auto method : {Lambda2Method::selberg, Lambda2Method::mobius}) {
    const auto s = build_arith_table(16, method);
    hand = std::max(hand, std::fabs(s.lambda2[4] - 3 * l2 * l2) / (3 * l2 * l2));
    hand = std::max(hand, std::fabs(s.lambda2[12] - 2 * l2 * l3) / (2 * l2 * l3));
  }
  report(2, "Lambda2 dual forms", t.max_form_discrepancy <= bound && hand <= 1e-12,
         "max discrepancy " + fmt(t.max_form_discrepancy) + " at n=" + std::to_string(t.worst_n) + " (<= " +
             fmt(bound) + "), hand values rel err " + fmt(hand) + " (<= 1e-12)");
}

void dual_route(const Fixture& f) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(1.0, static_cast<double>(kNMax));
  double worst = 0;
  for (int i = 0; i < 10'000; ++i) {
    const double x = u(rng);
    const double a = f.sums->big_f(x), b = f.sums->big_f_integral(x);
    worst = std::max(worst, std::fabs(a - b) / (1.0 + std::fabs(a) + std::log(x)));
  }
  report(3, "F dual route", worst <= 1e-8, "max |sum - integral| / (1 + |F| + log x) = " + fmt(worst) +
                                               " (<= 1e-8) at 10^4 random x <= 1e7");
}

void collapse(const Fixture& f) {
  double worst_sum = 0, worst_floor = 0;
  std::size_t n = 0;
  for (double x : geometric_range(1.0, 1.05, 1e6)) {
    worst_sum = std::max(worst_sum, std::fabs(check_f_sum_identity(*f.sums, x).residual) / x);
    if (x >= 2.0) worst_floor = std::max(worst_floor, std::fabs(floor_weighted_mu_sum(*f.sums, x).residual) / x);
    ++n;
  }
  report(4, "F-sum collapse", worst_sum <= 1e-9 && worst_floor <= 1e-9,
         "max |sum - log x| / x = " + fmt(worst_sum) + ", floor-weighted max |residual| / x = " + fmt(worst_floor) +
             " (<= 1e-9) over " + std::to_string(n) + " points");
}

void mertens_values(const Fixture& f) {
  const i64 expect[] = {-1, 1, 2, -23, -48, 212, 1037};
  const auto linear = linear_sieve_mobius(kNMax);
  bool ok = linear == f.sieve->mu;
  std::string detail = ok ? "linear sieve == segmented sieve on [1, 1e7]" : "sieve codepaths differ";
  i64 m_lin = 0;
  u64 next = 10;
  int k = 1;
  for (u64 n = 1; n <= kNMax; ++n) {
    m_lin += linear[n];
    if (n == next) {
      const i64 m = f.sums->mertens(static_cast<double>(n));
      ok = ok && m == expect[k - 1] && m_lin == m;
      if (k <= 5) ok = ok && oracle::mertens(n) == m;
      detail += "; M(1e" + std::to_string(k) + ")=" + std::to_string(m);
      next *= 10;
      ++k;
    }
  }
  report(5, "Mertens values", ok, detail + "; trial division agrees for k <= 5");
}

void remainder_growth(const Fixture& f) {
  const auto conv = std::make_shared<const ArithTable>(build_arith_table(*f.sieve, kNMax, Lambda2Method::selberg));
  const PrefixSums sums(f.sieve, conv);
  const auto xs = geometric_range(1e4, 1.05, 1e7);
  bool ok = true;
  std::string detail;
  for (RemainderKind kind : {RemainderKind::selberg_eq3, RemainderKind::lambda_theta_eq4, RemainderKind::logsq_eq9}) {
    const auto s = remainder_series(sums, kind, xs);
    const auto w = decade_sups(s, 4);
    const double g = max_decade_growth(w);
    ok = ok && w.size() == 3 && g <= 1.1;
    detail += std::string(kind_name(kind)) + " sups";
    for (const auto& e : w) detail += " " + fmt(e.sup);
    detail += " growth " + fmt(g) + "; ";
  }
  report(6, "remainder boundedness", ok, detail + "(growth <= 1.1 per decade on [1e4, 1e7])");
}

HProfile smoothed_profile(const Fixture& f) {
  return build_profile(f.sums, ProfileKind::smoothed, kNMax, 50, 0.5);
}

void abs_h(const HProfile& p) {
  double sup = 0;
  for (double h : p.h_values) sup = std::max(sup, std::fabs(h));
  double between = 0;
  for (double h : p.window_max_abs_h) between = std::max(between, h);
  report(7, "|H| <= 1", sup <= 1.0 + 1e-9 && between <= 1.0 + 1e-9,
         "max |H| at " + std::to_string(p.x_samples.size()) + " samples = " + fmt(sup) +
             ", between samples = " + fmt(between) + " (<= 1 + 1e-9)");
}

void endpoint_checks(const Fixture& f) {
  const auto xs = geometric_range(100.0, 1.25, static_cast<double>(kNMax));
  const auto hx = geometric_range(1.0, 1.25, std::pow(std::log(static_cast<double>(kNMax)), 2));
  const auto c = remainder_series(*f.sums, RemainderKind::lemma1_smoothed_eq18, xs);
  const auto h = remainder_series(*f.sums, RemainderKind::lemma1_h_eq7, hx);
  const auto m = remainder_series(*f.sums, RemainderKind::corollary_h_eq24, hx);
  bool ok = true;
  for (const auto* s : {&c, &h, &m})
    for (const auto& smp : s->samples) ok = ok && std::isfinite(smp.raw) && std::isfinite(smp.normalized);
  report(8, "endpoint residuals finite", ok,
         "sup c = " + fmt(c.sup_normalized) + " at x=" + fmt(c.argmax_x) + ", sup sqrt-normalized H residual = " +
             fmt(h.sup_normalized) + " at x=" + fmt(h.argmax_x) + ", sup Mertens-profile residual = " +
             fmt(m.sup_normalized) + " at x=" + fmt(m.argmax_x));
}

void arches() {
  const std::vector<double> zs = {0.5, 1.75, 2.0, 4.5, 5.25, 9.0};
  const double c = 0.8;
  std::vector<double> ts;
  for (int i = 0; i <= 90; ++i) ts.push_back(0.5 + 8.5 * i / 90.0);
  const HProfile p = build_profile(parabolic_arches(zs, c), ts);
  const auto ivs = interval_stats(p);
  bool ok = p.zeros.size() == zs.size() && ivs.size() == zs.size() - 1;
  double zerr = 0, ierr = 0, rerr = 0;
  if (ok) {
    for (std::size_t i = 0; i < zs.size(); ++i) zerr = std::max(zerr, std::fabs(p.zeros[i].x - zs[i]) / zs[i]);
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      const double w = zs[i + 1] - zs[i], exact = c * w * w * w / 6;
      ierr = std::max(ierr, std::fabs(ivs[i].integral_abs - exact) / exact);
      rerr = std::max(rerr, std::fabs(ivs[i].integral_abs / ivs[i].prop4_bound - 1.0 / 3.0));
    }
  }
  ok = ok && zerr <= 1e-10 && ierr <= 1e-9 && rerr <= 1e-12;
  report(9, "zero-interval machinery", ok,
         std::to_string(p.zeros.size()) + " zeros, rel err " + fmt(zerr) + " (<= 1e-10), integral rel err " +
             fmt(ierr) + " (<= 1e-9), |ratio - 1/3| = " + fmt(rerr));
}

void derivative(const Fixture& f) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(std::log(2.0), std::log(static_cast<double>(kNMax) - 1));
  const double h = 1e-6;
  double worst = 0;
  int used = 0;
  while (used < 100) {
    const double y = std::exp(u(rng));
    const double x = x_from_y(y);
    if (std::floor(y_from_x(x - h)) != std::floor(y_from_x(x + h))) continue;
    const double fd = (f.sums->h_smoothed(y_from_x(x + h)) - f.sums->h_smoothed(y_from_x(x - h))) / (2 * h);
    worst = std::max(worst, std::fabs(h_derivative(*f.sums, y).value - fd));
    ++used;
  }
  report(10, "derivative formula", worst <= 1e-4,
         "max |closed form - central difference| = " + fmt(worst) + " (<= 1e-4) at 100 points");
}

void iteration() {
  const auto half = lambda_iteration(0.5, 50);
  bool ok = std::fabs(half.steps[50].lambda_k - 2.0) <= 1e-12;
  for (double lam : {0.1, 0.5, 0.9}) {
    const auto it = lambda_iteration(lam, 50);
    for (std::size_t k = 1; k < it.steps.size(); ++k) {
      // strictly increasing until doubles reach the fixed point, never above it
      ok = ok && (it.steps[k].lambda_k > it.steps[k - 1].lambda_k || it.steps[k].lambda_k == it.limit);
      ok = ok && it.steps[k].lambda_k <= it.limit;
      ok = ok && std::fabs(it.steps[k].lambda_k - it.limit) <=
                     std::pow(lam, static_cast<double>(k)) * std::fabs(1.0 - it.limit) + 4 * 2.2e-16 * it.limit;
    }
  }
  report(11, "lambda iteration", ok,
         "lambda_50 - 2 = " + fmt(half.steps[50].lambda_k - 2.0) + "; monotone and contracting for 0.1, 0.5, 0.9");
}

void tail_sups(const Fixture& f) {
  const auto t = mertens_tail_sups(*f.sums, 2, 7);
  std::string detail;
  for (const auto& e : t) detail += "k=" + std::to_string(e.k) + ": " + fmt(e.sup) + " ";
  report(12, "Mertens tail sups (data)", non_increasing(t) && t.size() == 6,
         detail + (non_increasing(t) ? "non-increasing" : "trend broken"), false);
}

void performance() {
  SieveOptions one;
  one.threads = 1;
  const auto t0 = Clock::now();
  const auto s = sieve_table(kNMax, one);
  const double rate = static_cast<double>(kNMax) / seconds_since(t0);
  std::ostringstream out, err;
  const auto t1 = Clock::now();
  const int rc = cli::run({"report"}, out, err);
  const double suite = seconds_since(t1);
  report(13, "performance", rate >= 1e7 && suite < 300.0 && rc == 0 && s.mu[1] == 1,
         "sieve " + fmt(rate) + " integers/s on one thread (>= 1e7), full default report " + fmt(suite) +
             " s (< 300), exit " + std::to_string(rc));
}

}  // namespace

int main() {
  Fixture f;
  f.sieve = std::make_shared<const SieveTable>(sieve_table(kNMax));
  f.conv = std::make_shared<const ArithTable>(build_arith_table(*f.sieve, kConvCap, Lambda2Method::selberg));
  f.sums = std::make_shared<const PrefixSums>(f.sieve, f.conv);

  identity_suite(f);
  dual_forms();
  dual_route(f);
  collapse(f);
  mertens_values(f);
  remainder_growth(f);
  {
    const HProfile p = smoothed_profile(f);
    abs_h(p);
  }
  endpoint_checks(f);
  arches();
  derivative(f);
  iteration();
  tail_sups(f);
  performance();

  std::printf("%d asserted criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
