#include "mlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mlab/errors.hpp"
#include "mlab/format.hpp"
#include "mlab/grid.hpp"
#include "mlab/h_analysis.hpp"
#include "mlab/identities.hpp"
#include "mlab/sieve.hpp"
#include "mlab/summatory.hpp"

namespace mlab::cli {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Known values of M(10^k), k = 1..7.
constexpr i64 kMertensPowers[] = {-1, 1, 2, -23, -48, 212, 1037};

// Accepts plain integers and exact-integer literals such as 1e7.
u64 parse_count(const std::string& s, const char* what) {
  std::size_t idx = 0;
  double v = 0;
  try {
    v = std::stod(s, &idx);
  } catch (const std::exception&) {
    throw PreconditionError(std::string("malformed ") + what + " '" + s + "'");
  }
  if (idx != s.size() || !(v >= 0.0) || v != std::floor(v)) {
    throw PreconditionError(std::string("malformed ") + what + " '" + s + "'");
  }
  if (v > static_cast<double>(kMaxN)) {
    throw CapabilityError(std::string(what) + " exceeds 2^63 - 1", static_cast<double>(kMaxN));
  }
  // Large values lose integer precision through double; reparse digits when possible.
  if (s.find_first_not_of("0123456789") == std::string::npos) return std::stoull(s);
  return static_cast<u64>(v);
}

std::vector<double> sample_points(const RunConfig& c) {
  if (c.points) return parse_points(*c.points);
  if (c.grid) return parse_grid(*c.grid);
  return geometric_range(100.0, 1.25, static_cast<double>(c.n_max));
}

std::vector<double> profile_domain_grid(const RunConfig& c) {
  const double top = std::pow(std::log(static_cast<double>(c.n_max)), 2);
  return geometric_range(1.0, 1.25, top);
}

ProfileKind parse_profile_kind(const std::string& s) {
  if (s == "smoothed") return ProfileKind::smoothed;
  if (s == "mertens") return ProfileKind::mertens;
  throw PreconditionError("--kind must be smoothed or mertens");
}

std::string_view profile_kind_name(ProfileKind k) { return k == ProfileKind::smoothed ? "smoothed" : "mertens"; }

SieveOptions sieve_options(const RunConfig& c) {
  SieveOptions o;
  o.segment_size = c.segment_size;
  o.threads = c.threads;
  o.cache_dir = c.cache_dir;
  return o;
}

class Tables {
 public:
  explicit Tables(const RunConfig& c) : cfg_(c) {}

  std::shared_ptr<const SieveTable> sieve() {
    if (!sieve_) sieve_ = std::make_shared<SieveTable>(sieve_table(cfg_.n_max, sieve_options(cfg_)));
    return sieve_;
  }

  std::shared_ptr<const ArithTable> arith(Lambda2Method method = Lambda2Method::both) {
    if (!arith_) {
      arith_ = std::make_shared<ArithTable>(
          build_arith_table(*sieve(), cfg_.conv_cap, method, cfg_.tol, resolved_threads()));
    }
    return arith_;
  }

  std::shared_ptr<const PrefixSums> sums(bool with_conv) {
    if (!sums_ || (with_conv && !sums_->conv())) {
      sums_ = std::make_shared<PrefixSums>(sieve(), with_conv ? arith() : nullptr);
    }
    return sums_;
  }

  unsigned resolved_threads() const {
    return cfg_.threads ? cfg_.threads : std::max(1u, std::thread::hardware_concurrency());
  }

 private:
  const RunConfig& cfg_;
  std::shared_ptr<const SieveTable> sieve_;
  std::shared_ptr<const ArithTable> arith_;
  std::shared_ptr<const PrefixSums> sums_;
};

void emit(const RunConfig& c, std::ostream& out, const std::string& content) {
  if (c.out) {
    write_atomic(*c.out, content);
  } else {
    out << content;
  }
}

std::filesystem::path companion(const std::filesystem::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

CheckResult finite_check(std::string name, double value, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = value;
  c.threshold = kInf;
  c.status = std::isfinite(value) ? CheckStatus::pass : CheckStatus::fail;
  c.detail = std::move(detail);
  return c;
}

CheckResult data_check(std::string name, double measured, double threshold, bool pass, std::string detail = {}) {
  CheckResult c;
  c.name = std::move(name);
  c.measured = measured;
  c.threshold = threshold;
  c.asserted = false;
  c.status = pass ? CheckStatus::pass : CheckStatus::fail;
  c.detail = std::move(detail);
  return c;
}

// Largest |residual| / scale over a set of points, and where it occurs.
struct Worst {
  double ratio = 0;
  double x = kNaN;
  void update(double residual, double scale, double at) {
    const double r = std::fabs(residual) / scale;
    if (std::isnan(x) || r > ratio || (std::isnan(r) && !std::isnan(ratio))) {
      ratio = r;
      x = at;
    }
  }
};

std::string at_x(double x) { return "worst x = " + format_double(x); }

// ---------------------------------------------------------------------------
// Individual verification blocks shared by `verify` and `report`.

void check_tatuzawa(VerificationReport& r, const PrefixSums& sums, const std::vector<double>& xs,
                    const std::vector<TestFunction>& fns, double tau) {
  for (const TestFunction& fn : fns) {
    Worst w;
    for (double x : xs) {
      const double l = std::log(x);
      w.update(check_tatuzawa_iseki(sums, x, fn).residual, x * l * l, x);
    }
    r.add_bound("tatuzawa_iseki[" + fn.name + "]", w.ratio, tau, true,
                "max |residual| / (x (log x)^2); " + at_x(w.x));
  }
}

void check_f_sum(VerificationReport& r, const PrefixSums& sums, const std::vector<double>& xs, double tau) {
  Worst fs, fw;
  for (double x : xs) {
    fs.update(check_f_sum_identity(sums, x).residual, x, x);
    if (x >= 2.0) fw.update(floor_weighted_mu_sum(sums, x).residual, x, x);
  }
  r.add_bound("f_sum_collapse", fs.ratio, tau, true, "max |sum F(x/n) - log x| / x; " + at_x(fs.x));
  r.add_bound("floor_weighted_decomposition", fw.ratio, tau, true,
              "max |sum mu(n) floor(x/n) log(x/n) - log x - psi(x)| / x; " + at_x(fw.x));
}

void check_dual_route(VerificationReport& r, const PrefixSums& sums, std::size_t count, double tol) {
  std::mt19937_64 rng(0x6d6c6162);
  std::uniform_real_distribution<double> dist(1.0, static_cast<double>(sums.n_max()));
  std::vector<double> xs(count);
  for (double& x : xs) x = dist(rng);
  std::sort(xs.begin(), xs.end());
  std::vector<u64> ks;
  ks.reserve(xs.size());
  for (double x : xs) ks.push_back(static_cast<u64>(std::floor(x)));
  const auto pts = sums.at_sorted(ks);
  Worst w;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = PrefixSums::big_f_at(pts[i], xs[i]);
    const double b = PrefixSums::big_f_integral_at(pts[i], ks[i], xs[i]);
    w.update(a - b, 1.0 + std::fabs(a) + std::log(xs[i]), xs[i]);
  }
  r.add_bound("f_dual_route", w.ratio, tol, true,
              std::to_string(count) + " random x; |sum form - integral form| / (1 + |F| + log x); " + at_x(w.x));
}

void check_mertens_values(VerificationReport& r, const Tables& t, const PrefixSums& sums,
                          const std::vector<std::int8_t>& linear_mu) {
  // Independent codepath: prefix sums of the linear-sieve mu.
  i64 m_lin = 0;
  u64 next = 10;
  int k = 1;
  bool ok = true;
  std::ostringstream detail;
  for (u64 n = 1; n < linear_mu.size() && k <= 7; ++n) {
    m_lin += linear_mu[n];
    if (n == next) {
      const i64 m_seg = sums.mertens(static_cast<double>(n));
      const i64 known = kMertensPowers[k - 1];
      if (m_seg != known || m_lin != known) ok = false;
      detail << (k > 1 ? "; " : "") << "M(1e" << k << ")=" << m_seg;
      ++k;
      next *= 10;
    }
  }
  (void)t;
  CheckResult c;
  c.name = "mertens_powers_of_ten";
  c.measured = k - 1;
  c.threshold = k - 1;
  c.status = ok ? CheckStatus::pass : CheckStatus::fail;
  c.detail = detail.str();
  r.add_check(std::move(c));
}

void check_sieve_paths(VerificationReport& r, const SieveTable& s, const std::vector<std::int8_t>& linear_mu) {
  u64 mismatches = 0, first = 0;
  for (u64 n = 1; n <= s.n_max; ++n) {
    if (s.mu[n] != linear_mu[n]) {
      if (mismatches++ == 0) first = n;
    }
  }
  CheckResult c;
  c.name = "sieve_codepaths_agree";
  c.measured = static_cast<double>(mismatches);
  c.threshold = 0;
  c.status = mismatches == 0 ? CheckStatus::pass : CheckStatus::fail;
  c.detail = mismatches ? "first mismatch at n = " + std::to_string(first)
                        : "segmented and linear mu agree on [1, " + std::to_string(s.n_max) + "]";
  r.add_check(std::move(c));
  u64 squarefree = 0;
  for (u64 n = 1; n <= s.n_max; ++n) squarefree += s.mu[n] != 0;
  const double ratio = static_cast<double>(squarefree) / static_cast<double>(s.n_max);
  r.add_check(data_check("squarefree_density", ratio, 6.0 / (std::numbers::pi * std::numbers::pi),
                         std::fabs(ratio - 6.0 / (std::numbers::pi * std::numbers::pi)) <= 1e-3,
                         "fraction of squarefree n <= n_max against 6/pi^2"));
}

void check_forms(VerificationReport& r, const ArithTable& a, const Tolerances& tol) {
  const double l = std::log(static_cast<double>(std::max<u64>(a.n_max, 3)));
  r.add_bound("lambda2_dual_form", a.max_form_discrepancy, tol.rel * l * l, true,
              "max |mobius form - selberg form|; worst n = " + std::to_string(a.worst_n));
  double theta_worst = 0, neg = 0;
  for (u64 n = 2; n <= a.n_max; ++n) {
    const double ln = std::log(static_cast<double>(n));
    theta_worst = std::max(theta_worst, std::fabs(a.theta[n] * ln - a.lambda_star_lambda[n]) / (ln * ln));
    neg = std::min(neg, a.lambda2[n]);
  }
  r.add_bound("theta_consistency", theta_worst, tol.rel, true, "max |theta(n) log n - (Lambda*Lambda)(n)| / (log n)^2");
  r.add_bound("lambda2_nonnegative", std::max(0.0, -neg), tol.abs, true, "most negative Lambda2 value");
  if (a.n_max >= 12) {
    const double l2 = std::numbers::ln2, l3 = std::log(3.0);
    const double e4 = std::fabs(a.lambda2[4] - 3.0 * l2 * l2) / (3.0 * l2 * l2);
    const double e12 = std::fabs(a.lambda2[12] - 2.0 * l2 * l3) / (2.0 * l2 * l3);
    r.add_bound("lambda2_hand_values", std::max(e4, e12), 1e-12, true, "relative error at n = 4 and n = 12");
  }
}

void check_synthetic_arches(VerificationReport& r) {
  const std::vector<double> zs = {0.5, 1.75, 2.0, 4.5, 5.25, 9.0};
  const double c = 0.8;
  auto src = parabolic_arches(zs, c);
  std::vector<double> ts;
  for (int i = 0; i <= 90; ++i) ts.push_back(0.5 + 8.5 * i / 90.0);
  HProfile p = build_profile(src, ts, 0.5);
  const auto ivs = interval_stats(p);
  double zero_err = kInf, integral_err = 0, ratio_err = 0;
  if (p.zeros.size() == zs.size() && ivs.size() == zs.size() - 1) {
    zero_err = 0;
    for (std::size_t i = 0; i < zs.size(); ++i) zero_err = std::max(zero_err, std::fabs(p.zeros[i].x - zs[i]) / zs[i]);
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      const double w = zs[i + 1] - zs[i];
      const double exact = c * w * w * w / 6.0;
      integral_err = std::max(integral_err, std::fabs(ivs[i].integral_abs - exact) / exact);
      ratio_err = std::max(ratio_err, std::fabs(ivs[i].integral_abs / ivs[i].prop4_bound - 1.0 / 3.0));
    }
  }
  r.add_bound("synthetic_zero_recovery", zero_err, 1e-10, true, "max relative zero error on parabolic arches");
  r.add_bound("synthetic_interval_integrals", integral_err, 1e-9, true, "relative error against c (b-a)^3 / 6");
  r.add_bound("synthetic_interval_bound_ratio", ratio_err, 1e-9, true, "|integral / bound - 1/3|");
}

void check_derivative(VerificationReport& r, const PrefixSums& sums, std::size_t count) {
  std::mt19937_64 rng(0x64657276);
  const double top = std::log(static_cast<double>(sums.n_max()) - 1.0);
  std::uniform_real_distribution<double> dist(std::log(1.5), top);
  constexpr double kStep = 1e-6;
  double worst = 0, worst_y = kNaN;
  std::size_t done = 0;
  while (done < count) {
    const double y = std::exp(dist(rng));
    const double x = x_from_y(y);
    const double y_lo = y_from_x(x - kStep), y_hi = y_from_x(x + kStep);
    // Keep the difference stencil inside one step of M where the jump of H' is visible.
    if (std::floor(y_lo) != std::floor(y_hi) && y < 1e4) continue;
    if (std::floor(y) == y) continue;
    const double fd = (sums.h_smoothed(y_hi) - sums.h_smoothed(y_lo)) / (2.0 * kStep);
    const double d = std::fabs(h_derivative(sums, y).value - fd);
    if (d > worst || std::isnan(worst_y)) {
      worst = d;
      worst_y = y;
    }
    ++done;
  }
  r.add_bound("derivative_finite_difference", worst, 1e-4, true,
              std::to_string(count) + " random y; worst y = " + format_double(worst_y));
}

void check_lambda_iteration(VerificationReport& r) {
  const auto half = lambda_iteration(0.5, 50);
  r.add_bound("lambda_iteration_limit", half.steps.back().lambda_k - 2.0, 1e-12, true, "lambda = 0.5, n = 50");
  double worst = 0;
  bool monotone = true;
  for (double lam : {0.1, 0.5, 0.9}) {
    const auto it = lambda_iteration(lam, 60);
    for (std::size_t k = 1; k < it.steps.size(); ++k) {
      if (!(it.steps[k].lambda_k > it.steps[k - 1].lambda_k) && it.steps[k].lambda_k != it.limit) monotone = false;
      if (it.steps[k].lambda_k > it.limit) monotone = false;
      const double bound = std::pow(lam, static_cast<double>(k)) * std::fabs(1.0 - it.limit);
      worst = std::max(worst, std::fabs(it.steps[k].lambda_k - it.limit) - bound - 4e-16 * it.limit);
    }
  }
  CheckResult c;
  c.name = "lambda_iteration_monotone";
  c.measured = monotone ? 1 : 0;
  c.threshold = 1;
  c.status = monotone ? CheckStatus::pass : CheckStatus::fail;
  c.detail = "strictly increasing and below 1/(1-lambda) for lambda in {0.1, 0.5, 0.9}";
  r.add_check(std::move(c));
  r.add_bound("lambda_iteration_contraction", std::max(0.0, worst), 0.0, true,
              "excess of |lambda_k - limit| over lambda^k |1 - limit|");
}

json profile_checks(VerificationReport& r, const HProfile& p, const std::vector<ZeroInterval>& ivs,
                    const std::string& tag, const Tolerances& tol) {
  const ConstantEstimates& c = p.constants;
  if (p.kind == ProfileKind::smoothed && !p.synthetic) {
    double sup = 0;
    for (double h : p.h_values) sup = std::max(sup, std::fabs(h));
    for (double h : p.window_max_abs_h) sup = std::max(sup, h);
    r.add_bound(tag + ".abs_h_le_1", std::max(0.0, sup - 1.0), tol.abs, true,
                "excess of sup |H| over 1; sup = " + format_double(sup));
  }
  r.add_bound(tag + ".ell_le_alpha", std::max(0.0, c.ell_hat - c.alpha_hat), tol.abs, true, "ESTIMATES");
  r.add_check(data_check(tag + ".L_le_alpha", c.L_hat - c.alpha_hat, tol.abs, c.L_hat <= c.alpha_hat + tol.abs,
                         "ESTIMATES; L uses the whole range, alpha only the tail window"));
  if (ivs.empty()) {
    CheckResult na;
    na.name = tag + ".interval_bound";
    na.status = CheckStatus::not_applicable;
    na.detail = "fewer than two zeros: finite zeros branch";
    r.add_check(na);
    na.name = tag + ".interval_bound_global_m";
    r.add_check(std::move(na));
    return json::object();
  }
  double worst_ratio = 0, worst_global = 0, mv = 0, gap_min = kInf;
  for (const ZeroInterval& iv : ivs) {
    if (iv.prop4_bound > 0.0) worst_ratio = std::max(worst_ratio, iv.integral_abs / iv.prop4_bound);
    else if (iv.integral_abs > 0.0) worst_ratio = kInf;
    const double global = 0.5 * c.m_hat * (iv.b - iv.a) * (iv.b - iv.a);
    if (global > 0.0) worst_global = std::max(worst_global, iv.integral_abs / global);
    else if (iv.integral_abs > 0.0) worst_global = kInf;
    mv = std::max(mv, iv.h_at_xi - iv.max_abs_h);
    if (!std::isnan(iv.lemma2_rhs)) gap_min = std::min(gap_min, iv.lemma2_rhs - iv.integral_abs);
  }
  CheckResult p4;
  p4.name = tag + ".interval_bound";
  p4.measured = worst_ratio;
  p4.threshold = 1.0;
  p4.status = worst_ratio <= 1.0 ? CheckStatus::pass : CheckStatus::fail;
  p4.detail = "max integral / (m (b-a)^2 / 2) over " + std::to_string(ivs.size()) + " intervals";
  r.add_check(std::move(p4));
  CheckResult p4g;
  p4g.name = tag + ".interval_bound_global_m";
  p4g.measured = worst_global;
  p4g.threshold = 1.0;
  p4g.status = worst_global <= 1.0 ? CheckStatus::pass : CheckStatus::fail;
  p4g.detail = "max integral / (m_hat (b-a)^2 / 2) with the profile-wide m_hat";
  r.add_check(std::move(p4g));
  r.add_bound(tag + ".mean_value", std::max(0.0, mv), 1e-12, true, "excess of h_at_xi over sup |H| on [a, b]");
  r.add_check(data_check(tag + ".interval_rhs_gap", gap_min, 0.0, gap_min >= 0.0,
                         "min of rhs - integral; the o(b-a-eps) term is not computable"));
  return json::object();
}

std::vector<double> tatuzawa_points(u64 n_max) {
  const double top = std::min(1e5, static_cast<double>(n_max));
  if (top <= 2.0) return {2.0};
  const double ratio = std::pow(top / 2.0, 1.0 / 199.0);
  auto xs = geometric_grid(2.0, ratio, 200);
  xs.back() = std::min(xs.back(), top);
  return xs;
}

std::vector<double> clip(std::vector<double> xs, double lo, double hi) {
  xs.erase(std::remove_if(xs.begin(), xs.end(), [&](double x) { return x < lo || x > hi; }), xs.end());
  return xs;
}

}  // namespace

void RunConfig::validate() const {
  if (n_max < 1) throw PreconditionError("--n-max must be >= 1");
  if (n_max > kMaxN) throw CapabilityError("--n-max exceeds 2^63 - 1", static_cast<double>(kMaxN));
  if (conv_cap < 1) throw PreconditionError("--conv-cap must be >= 1");
  if (conv_cap > n_max) throw PreconditionError("--conv-cap must not exceed --n-max");
  if (segment_size < 1) throw PreconditionError("--segment-size must be >= 1");
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) throw PreconditionError("--tail-fraction must lie in (0, 1)");
  if (samples_per_decade < 10) throw PreconditionError("--samples-per-decade must be >= 10");
  if (!format.empty() && format != "csv" && format != "json") throw PreconditionError("--format must be csv or json");
  parse_profile_kind(kind);
}

json RunConfig::echo() const {
  json j;
  j["n_max"] = n_max;
  j["conv_cap"] = conv_cap;
  j["segment_size"] = segment_size;
  j["grid"] = grid ? *grid : (points ? "points" : "100:1.25:..n_max");
  if (points) j["points"] = *points;
  j["tail_fraction"] = tail_fraction;
  j["tolerances"] = {{"rel", tol.rel}, {"abs", tol.abs}};
  j["samples_per_decade"] = samples_per_decade;
  j["cache"] = cache_dir.has_value();
  return j;
}

VerificationReport run_suite(const RunConfig& cfg) {
  cfg.validate();
  VerificationReport r(cfg.echo());
  Tables t(cfg);
  auto stamp = Clock::now();
  auto lap = [&](const char* step) {
    if (!cfg.timings) return;
    const auto now = Clock::now();
    r.add_timing(step, std::chrono::duration<double>(now - stamp).count());
    stamp = now;
  };

  const auto sieve = t.sieve();
  lap("sieve");
  const auto linear_mu = linear_sieve_mobius(cfg.n_max);
  check_sieve_paths(r, *sieve, linear_mu);
  lap("linear_sieve");
  const auto arith = t.arith(Lambda2Method::both);
  check_forms(r, *arith, cfg.tol);
  const auto pw = pointwise_residuals_13_14(*arith, static_cast<double>(std::max<u64>(cfg.conv_cap, 2)));
  r.set_section("pointwise_residuals", {{"x", pw.x},
                                     {"max_abs_r13_normalized", pw.max_abs_r13_normalized},
                                     {"mean_abs_r13_normalized", pw.mean_abs_r13_normalized},
                                     {"avg_r13", pw.avg_r13},
                                     {"max_abs_r14", pw.max_abs_r14},
                                     {"argmax_r14", pw.argmax_r14},
                                     {"avg_r14", pw.avg_r14}});
  lap("convolution");
  const auto sums = t.sums(true);
  lap("prefix_sums");
  check_mertens_values(r, t, *sums, linear_mu);

  std::vector<TestFunction> fns = {test_function_big_f(*sums), test_function_one(), test_function_log()};
  check_tatuzawa(r, *sums, tatuzawa_points(cfg.n_max), fns, cfg.tol.rel);
  lap("tatuzawa_iseki");
  const auto grid = sample_points(cfg);
  check_f_sum(r, *sums, clip(grid, 1.0, std::min(1e6, static_cast<double>(cfg.n_max))), cfg.tol.rel);
  {
    const double x = std::min(4.0, static_cast<double>(cfg.n_max));
    if (x >= 2.0) {
      const double gap = check_f_sum_identity(*sums, x).sum - floor_weighted_mu_sum(*sums, x).value;
      CheckResult c;
      c.name = "f_sum_floor_readings_gap";
      c.status = CheckStatus::not_applicable;
      c.measured = gap;
      c.threshold = 0;
      c.asserted = false;
      c.detail = "sum F(x/n) minus the floor-weighted sum at x = 4; the two readings differ";
      r.add_check(std::move(c));
    }
  }
  check_dual_route(r, *sums, 10000, 1e-8);
  lap("f_identities");

  for (RemainderKind kind : kAllRemainderKinds) {
    std::vector<double> xs = profile_domain(kind) ? profile_domain_grid(cfg)
                                                  : clip(grid, kind_min_x(kind), kind_cap(*sums, kind));
    const RemainderSeries s = remainder_series(*sums, kind, xs);
    r.add_series(s);
    if (kind == RemainderKind::selberg_eq3 || kind == RemainderKind::lambda_theta_eq4 ||
        kind == RemainderKind::logsq_eq9) {
      const auto sups = decade_sups(s, 4);
      const double growth = max_decade_growth(sups);
      json arr = json::array();
      for (const WindowSup& w : sups) arr.push_back({{"k", w.k}, {"sup", w.sup}, {"argmax_x", w.argmax_x}, {"count", w.count}});
      r.set_section(std::string("decade_sups.") + std::string(kind_name(kind)), arr);
      if (std::isnan(growth)) {
        CheckResult na;
        na.name = std::string(kind_name(kind)) + ".decade_growth";
        na.status = CheckStatus::not_applicable;
        na.asserted = false;
        na.detail = "fewer than two decade windows above 1e4";
        r.add_check(std::move(na));
      } else {
        r.add_check(data_check(std::string(kind_name(kind)) + ".decade_growth", growth, 1.1, growth <= 1.1,
                               "max ratio of consecutive per-decade sups of |normalized|"));
      }
    }
    if (kind == RemainderKind::lemma1_smoothed_eq18 || kind == RemainderKind::lemma1_h_eq7 ||
        kind == RemainderKind::corollary_h_eq24) {
      r.add_check(finite_check(std::string(kind_name(kind)) + ".finite", s.sup_normalized,
                               "sup |normalized| at x = " + format_double(s.argmax_x)));
    }
  }
  lap("remainders");

  for (ProfileKind pk : {ProfileKind::smoothed, ProfileKind::mertens}) {
    HProfile p = build_profile(sums, pk, cfg.n_max, cfg.samples_per_decade, cfg.tail_fraction);
    if (p.empty()) continue;
    const auto ivs = interval_stats(p);
    const std::string tag = std::string("profile.") + std::string(profile_kind_name(pk));
    if (pk == ProfileKind::smoothed) {
      profile_checks(r, p, ivs, tag, cfg.tol);
    } else {
      CheckResult c;
      c.name = tag + ".zero_count";
      c.status = CheckStatus::not_applicable;
      c.asserted = false;
      c.measured = static_cast<double>(p.zeros.size());
      c.detail = "step-function zeros are descriptive only";
      r.add_check(std::move(c));
    }
    r.set_constants(profile_kind_name(pk), p.constants, p);
  }
  lap("profiles");

  check_synthetic_arches(r);
  check_derivative(r, *sums, 100);
  check_lambda_iteration(r);
  {
    const auto li = lambda_iteration(cfg.lambda, cfg.steps, cfg.alpha);
    r.set_section("lambda_iteration", {{"lambda", li.lambda},
                                       {"alpha", li.alpha},
                                       {"limit", li.limit},
                                       {"fixed_alpha_bound_limit", li.bound_limit},
                                       {"final_lambda_k", li.steps.back().lambda_k},
                                       {"final_fixed_alpha_bound", li.steps.back().bound},
                                       {"final_shrinking_alpha", li.steps.back().alpha_shrunk}});
  }

  const auto tails = mertens_tail_sups(*sums, 2, 7);
  json tj = json::array();
  bool strict = true;
  for (std::size_t i = 0; i < tails.size(); ++i) {
    tj.push_back({{"k", tails[i].k}, {"sup", tails[i].sup}, {"argmax_y", tails[i].argmax_y}});
    if (i > 0 && !(tails[i].sup < tails[i - 1].sup)) strict = false;
  }
  r.set_section("mertens_tail_sups", {{"values", tj}, {"strictly_decreasing", strict}});
  r.add_check(data_check("mertens_tail_sup_non_increasing", static_cast<double>(tails.size()), 0,
                         non_increasing(tails), "sup_{y >= 10^k} |M(y)|/y for k = 2..7"));
  lap("diagnostics");
  return r;
}

namespace {

int cmd_sieve(const RunConfig& c, std::ostream& out) {
  Tables t(c);
  const auto s = t.sieve();
  if (c.points) {
    std::ostringstream os;
    const bool js = c.format == "json";
    json arr = json::array();
    if (!js) os << "n,mu,lambda\n";
    for (double x : parse_points(*c.points)) {
      if (x < 1.0 || x != std::floor(x)) throw PreconditionError("sieve points must be positive integers");
      if (x > static_cast<double>(c.n_max)) {
        throw CapabilityError("point exceeds --n-max", static_cast<double>(c.n_max));
      }
      const u64 n = static_cast<u64>(x);
      if (js) {
        arr.push_back({{"n", n}, {"mu", s->mu[n]}, {"lambda", s->lambda[n]}});
      } else {
        os << n << ',' << int(s->mu[n]) << ',' << format_double(s->lambda[n]) << '\n';
      }
    }
    emit(c, out, js ? json_text(arr) : os.str());
    return ok;
  }
  i64 m = 0;
  u64 sf = 0;
  for (u64 n = 1; n <= s->n_max; ++n) {
    m += s->mu[n];
    sf += s->mu[n] != 0;
  }
  const double ratio = static_cast<double>(sf) / static_cast<double>(s->n_max);
  if (c.format == "json") {
    emit(c, out, json_text({{"n_max", s->n_max}, {"mertens", m}, {"squarefree_ratio", ratio},
                            {"segment_size", c.segment_size}}));
  } else {
    emit(c, out, "n_max,mertens,squarefree_ratio\n" + std::to_string(s->n_max) + ',' + std::to_string(m) + ',' +
                     format_double(ratio) + '\n');
  }
  return ok;
}

Lambda2Method parse_method(const std::string& w) {
  if (w.empty() || w == "both") return Lambda2Method::both;
  if (w == "selberg-form") return Lambda2Method::selberg;
  if (w == "mobius-form") return Lambda2Method::mobius;
  throw PreconditionError("--which for table must be selberg-form, mobius-form or both");
}

int cmd_table(const RunConfig& c, std::ostream& out) {
  const Lambda2Method method = parse_method(c.which);
  std::vector<u64> rows;
  if (c.points) {
    for (double x : parse_points(*c.points)) {
      if (x < 1.0 || x != std::floor(x)) throw PreconditionError("table points must be positive integers");
      if (x > static_cast<double>(c.conv_cap)) {
        throw CapabilityError("point exceeds --conv-cap", static_cast<double>(c.conv_cap));
      }
      rows.push_back(static_cast<u64>(x));
    }
    std::sort(rows.begin(), rows.end());
  }
  RunConfig sc = c;
  sc.n_max = c.conv_cap;
  Tables t(sc);
  const ArithTable a = build_arith_table(*t.sieve(), c.conv_cap, method, c.tol, t.resolved_threads());
  if (c.format == "json") {
    json j;
    j["n_max"] = a.n_max;
    j["method"] = method_name(a.method);
    j["max_form_discrepancy"] = std::isnan(a.max_form_discrepancy) ? json(nullptr) : json(a.max_form_discrepancy);
    j["worst_n"] = a.worst_n;
    if (a.n_max >= 2) {
      const auto pw = pointwise_residuals_13_14(a, static_cast<double>(a.n_max));
      j["pointwise_residuals"] = {{"max_abs_r13_normalized", pw.max_abs_r13_normalized},
                              {"mean_abs_r13_normalized", pw.mean_abs_r13_normalized},
                              {"avg_r13", pw.avg_r13},
                              {"max_abs_r14", pw.max_abs_r14},
                              {"argmax_r14", pw.argmax_r14},
                              {"avg_r14", pw.avg_r14}};
    }
    emit(c, out, json_text(j));
  } else {
    std::ostringstream os;
    write_arith_csv(os, a, rows);
    emit(c, out, os.str());
  }
  return ok;
}

int cmd_mertens(const RunConfig& c, std::ostream& out) {
  auto xs = sample_points(c);
  std::sort(xs.begin(), xs.end());
  for (double x : xs) {
    if (x < 1.0) throw PreconditionError("points must be >= 1");
    if (x >= static_cast<double>(c.n_max) + 1.0) throw CapabilityError("point exceeds --n-max", static_cast<double>(c.n_max));
  }
  Tables t(c);
  const bool conv = std::any_of(xs.begin(), xs.end(), [&](double x) { return x < static_cast<double>(c.conv_cap) + 1.0; });
  const auto sums = t.sums(conv);
  if (c.format == "json") {
    json arr = json::array();
    for (double x : xs) {
      json row = {{"x", x}, {"M", sums->mertens(x)}, {"F_sum", sums->big_f(x)},
                  {"F_integral", sums->big_f_integral(x)}, {"psi", sums->psi(x)}};
      row["S_lambda2"] = x < static_cast<double>(sums->conv_cap()) + 1.0 ? json(sums->sum_lambda2(x)) : json(nullptr);
      arr.push_back(row);
    }
    emit(c, out, json_text(arr));
  } else {
    std::ostringstream os;
    write_summatory_csv(os, *sums, xs);
    emit(c, out, os.str());
  }
  return ok;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  const std::string which = c.which.empty() ? "all" : c.which;
  static const std::vector<std::string> kWhich = {"tatuzawa-iseki", "f-sum", "floor-weighted", "dual-form",
                                                  "dual-route",     "mertens", "all"};
  if (std::find(kWhich.begin(), kWhich.end(), which) == kWhich.end()) {
    throw PreconditionError("--which for verify must be one of tatuzawa-iseki, f-sum, floor-weighted, dual-form, "
                            "dual-route, mertens, all");
  }
  const bool explicit_points = c.points || c.grid;
  std::vector<double> xs = sample_points(c);
  std::sort(xs.begin(), xs.end());
  Tables t(c);
  const bool need_conv = which == "dual-form" || which == "all";
  const auto sums = t.sums(need_conv);
  VerificationReport r(c.echo());
  std::ostringstream rows;
  rows << "check,x,residual,threshold,status\n";
  auto row = [&](const std::string& name, double x, double res, double thr) {
    rows << name << ',' << format_double(x) << ',' << format_double(res) << ',' << format_double(thr) << ','
         << (std::fabs(res) <= thr ? "pass" : "fail") << '\n';
  };

  if (which == "tatuzawa-iseki" || which == "all") {
    std::vector<TestFunction> fns;
    if (which == "all") {
      fns = {test_function_big_f(*sums), test_function_one(), test_function_log()};
    } else {
      fns.push_back(test_function_by_name(c.function, *sums));
    }
    const auto pts = explicit_points ? xs : tatuzawa_points(c.n_max);
    for (const auto& fn : fns) {
      for (double x : pts) {
        const double l = std::log(x);
        row("tatuzawa_iseki[" + fn.name + "]", x, check_tatuzawa_iseki(*sums, x, fn).residual, c.tol.rel * x * l * l);
      }
    }
    check_tatuzawa(r, *sums, pts, fns, c.tol.rel);
  }
  if (which == "f-sum" || which == "floor-weighted" || which == "all") {
    const auto pts = clip(xs, which == "f-sum" ? 1.0 : 2.0, static_cast<double>(c.n_max));
    Worst w;
    for (double x : pts) {
      const double res = which == "f-sum" || which == "all" ? check_f_sum_identity(*sums, x).residual
                                                            : floor_weighted_mu_sum(*sums, x).residual;
      row(which == "floor-weighted" ? "floor_weighted_decomposition" : "f_sum_collapse", x, res, c.tol.rel * x);
    }
    if (which == "all") {
      check_f_sum(r, *sums, clip(xs, 1.0, std::min(1e6, static_cast<double>(c.n_max))), c.tol.rel);
    } else {
      for (double x : pts) {
        w.update(which == "f-sum" ? check_f_sum_identity(*sums, x).residual : floor_weighted_mu_sum(*sums, x).residual,
                 x, x);
      }
      r.add_bound(which == "f-sum" ? "f_sum_collapse" : "floor_weighted_decomposition", w.ratio, c.tol.rel, true,
                  "max |residual| / x; " + at_x(w.x));
    }
  }
  if (which == "dual-form" || which == "all") check_forms(r, *t.arith(), c.tol);
  if (which == "dual-route" || which == "all") {
    if (explicit_points) {
      Worst w;
      for (double x : xs) {
        const double a = sums->big_f(x), b = sums->big_f_integral(x);
        const double scale = 1.0 + std::fabs(a) + std::log(x);
        row("f_dual_route", x, a - b, 1e-8 * scale);
        w.update(a - b, scale, x);
      }
      r.add_bound("f_dual_route", w.ratio, 1e-8, true, at_x(w.x));
    } else {
      check_dual_route(r, *sums, 10000, 1e-8);
    }
  }
  if (which == "mertens" || which == "all") {
    check_sieve_paths(r, *t.sieve(), linear_sieve_mobius(c.n_max));
    check_mertens_values(r, t, *sums, linear_sieve_mobius(c.n_max));
  }

  emit(c, out, c.format == "json" ? r.dump() : rows.str());
  return r.all_asserted_pass() ? ok : assertion_failed;
}

int cmd_remainders(const RunConfig& c, std::ostream& out) {
  const std::string which = c.which.empty() ? "all" : c.which;
  std::vector<RemainderKind> kinds;
  if (which == "all") {
    kinds.assign(std::begin(kAllRemainderKinds), std::end(kAllRemainderKinds));
  } else {
    kinds.push_back(parse_kind(which));
  }
  const bool explicit_points = c.points || c.grid;
  const auto grid = sample_points(c);
  Tables t(c);
  const bool need_conv = std::any_of(kinds.begin(), kinds.end(), [](RemainderKind k) {
    return k == RemainderKind::selberg_eq3 || k == RemainderKind::lambda_theta_eq4;
  });
  const auto sums = t.sums(need_conv);
  std::ostringstream os;
  json arr = json::array();
  bool header = true;
  for (RemainderKind k : kinds) {
    std::vector<double> xs;
    if (which != "all" && explicit_points) {
      xs = grid;
    } else if (profile_domain(k)) {
      xs = profile_domain_grid(c);
    } else {
      xs = clip(grid, kind_min_x(k), kind_cap(*sums, k));
    }
    const RemainderSeries s = remainder_series(*sums, k, xs);
    write_series_csv(os, s, header);
    header = false;
    arr.push_back(series_summary(s, *sums));
  }
  emit(c, out, c.format == "json" ? json_text(arr) : os.str());
  return ok;
}

HProfile profile_for(const RunConfig& c, Tables& t, std::vector<ZeroInterval>& ivs) {
  const auto sums = t.sums(false);
  HProfile p = build_profile(sums, parse_profile_kind(c.kind), c.n_max, c.samples_per_decade, c.tail_fraction);
  ivs = p.empty() ? std::vector<ZeroInterval>{} : interval_stats(p);
  return p;
}

int cmd_h_profile(const RunConfig& c, std::ostream& out) {
  Tables t(c);
  std::vector<ZeroInterval> ivs;
  HProfile p = profile_for(c, t, ivs);
  json cj = p.empty() ? json::object() : constants_json(p.constants, p);
  if (c.format == "json") {
    emit(c, out, json_text(cj));
    return ok;
  }
  std::ostringstream prof, zeros, ints;
  write_profile_csv(prof, p);
  write_zeros_csv(zeros, p);
  write_intervals_csv(ints, ivs);
  emit(c, out, prof.str());
  if (c.out) {
    write_atomic(companion(*c.out, "_zeros.csv"), zeros.str());
    write_atomic(companion(*c.out, "_intervals.csv"), ints.str());
    write_atomic(companion(*c.out, "_constants.json"), json_text(cj));
  }
  return ok;
}

int cmd_lemma2(const RunConfig& c, std::ostream& out) {
  Tables t(c);
  std::vector<ZeroInterval> ivs;
  HProfile p = profile_for(c, t, ivs);
  VerificationReport r(c.echo());
  if (!p.empty()) {
    profile_checks(r, p, ivs, "profile." + c.kind, c.tol);
    r.set_constants(c.kind, p.constants, p);
  }
  if (c.format == "json") {
    emit(c, out, r.dump());
  } else {
    std::ostringstream os;
    write_intervals_csv(os, ivs);
    emit(c, out, os.str());
  }
  return r.all_asserted_pass() ? ok : assertion_failed;
}

int cmd_iterate(const RunConfig& c, std::ostream& out) {
  const auto it = lambda_iteration(c.lambda, c.steps, c.alpha);
  if (c.format == "json") {
    json steps = json::array();
    for (const auto& s : it.steps) {
      steps.push_back({{"k", s.k}, {"lambda_k", s.lambda_k}, {"bound", s.bound}, {"alpha_shrunk", s.alpha_shrunk}});
    }
    emit(c, out, json_text({{"lambda", it.lambda}, {"alpha", it.alpha}, {"limit", it.limit},
                            {"bound_limit", it.bound_limit}, {"steps", steps}}));
  } else {
    std::ostringstream os;
    os << "k,lambda_k,bound,alpha_shrunk\n";
    for (const auto& s : it.steps) {
      os << s.k << ',' << format_double(s.lambda_k) << ',' << format_double(s.bound) << ','
         << format_double(s.alpha_shrunk) << '\n';
    }
    emit(c, out, os.str());
  }
  return ok;
}

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const VerificationReport r = run_suite(c);
  if (c.format == "csv") {
    std::ostringstream os;
    os << "check,status,measured,threshold,asserted\n";
    for (const auto& k : r.checks()) {
      os << k.name << ',' << status_name(k.status) << ',' << format_double(k.measured) << ','
         << format_double(k.threshold) << ',' << (k.asserted ? "true" : "false") << '\n';
    }
    emit(c, out, os.str());
  } else {
    emit(c, out, r.dump());
  }
  for (const auto& name : r.failures()) {
    const CheckResult* k = r.find(name);
    err << "FAILED " << name << ": measured " << format_double(k->measured) << ", threshold "
        << format_double(k->threshold) << '\n';
  }
  return r.all_asserted_pass() ? ok : assertion_failed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mertens-function verification workbench", "mlab"};
  app.set_version_flag("--version", MLAB_VERSION);
  app.require_subcommand(1);

  RunConfig cfg;
  std::string n_max_s, conv_cap_s, segment_s;
  std::string cache_s, out_s;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--n-max", n_max_s, "Sieve cap (default 1e7)");
    sub->add_option("--conv-cap", conv_cap_s, "Convolution cap (default 1e6)");
    sub->add_option("--segment-size", segment_s, "Sieve segment length (default 2^20)");
    sub->add_option("--threads", cfg.threads, "Worker threads, 0 = all cores");
    sub->add_option("--grid", cfg.grid, "Geometric grid start:ratio:count");
    sub->add_option("--points", cfg.points, "Explicit points a,b,c");
    sub->add_option("--which", cfg.which, "Check, method or series kind");
    sub->add_option("--kind", cfg.kind, "Profile kind: smoothed or mertens");
    sub->add_option("--tail-fraction", cfg.tail_fraction, "Tail window fraction in (0, 1)");
    sub->add_option("--tau-rel", cfg.tol.rel, "Relative tolerance");
    sub->add_option("--tau-abs", cfg.tol.abs, "Absolute tolerance");
    sub->add_option("--samples-per-decade", cfg.samples_per_decade, "Profile samples per decade of y");
    sub->add_option("--function", cfg.function, "Test function for tatuzawa-iseki: one, log or F");
    sub->add_option("--lambda", cfg.lambda, "Iteration parameter in (0, 1)");
    sub->add_option("--steps", cfg.steps, "Iteration steps");
    sub->add_option("--alpha", cfg.alpha, "Iteration bound alpha");
    sub->add_option("--cache", cache_s, "Segment cache directory (MLAB_CACHE overrides)");
    sub->add_option("--out", out_s, "Output path (stdout if omitted)");
    sub->add_option("--format", cfg.format, "csv or json");
    sub->add_flag("--timings", cfg.timings, "Include wall-clock timings in the report");
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"sieve", "Sieve mu and Lambda"},
      {"table", "Build the Lambda2 / Theta table"},
      {"mertens", "Summatory values at sample points"},
      {"verify", "Exact identity checks"},
      {"remainders", "Normalized remainder series"},
      {"h-profile", "Sampled H profile with zeros and constants"},
      {"lemma2", "Zero-interval statistics"},
      {"iterate", "The lambda_k recurrence"},
      {"report", "Full verification suite"},
  };
  for (const auto& [name, desc] : commands) add_common(app.add_subcommand(name, desc));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? ok : usage;
  }

  try {
    if (!n_max_s.empty()) cfg.n_max = parse_count(n_max_s, "--n-max");
    if (!conv_cap_s.empty()) cfg.conv_cap = parse_count(conv_cap_s, "--conv-cap");
    else cfg.conv_cap = std::min(cfg.conv_cap, cfg.n_max);
    if (!segment_s.empty()) cfg.segment_size = parse_count(segment_s, "--segment-size");
    if (!cache_s.empty()) cfg.cache_dir = cache_s;
    if (const char* env = std::getenv("MLAB_CACHE"); env && *env) cfg.cache_dir = std::filesystem::path(env);
    if (!out_s.empty()) cfg.out = out_s;
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cfg.format.empty()) cfg.format = cmd == "report" ? "json" : "csv";
    cfg.validate();
    // Parse sample specifications before any work so bad grids write nothing.
    if (cfg.grid) parse_grid(*cfg.grid);
    if (cfg.points) parse_points(*cfg.points);

    if (cmd == "sieve") return cmd_sieve(cfg, out);
    if (cmd == "table") return cmd_table(cfg, out);
    if (cmd == "mertens") return cmd_mertens(cfg, out);
    if (cmd == "verify") return cmd_verify(cfg, out);
    if (cmd == "remainders") return cmd_remainders(cfg, out);
    if (cmd == "h-profile") return cmd_h_profile(cfg, out);
    if (cmd == "lemma2") return cmd_lemma2(cfg, out);
    if (cmd == "iterate") return cmd_iterate(cfg, out);
    return cmd_report(cfg, out, err);
  } catch (const CapabilityError& e) {
    err << "capability exceeded: " << e.what() << " (max usable " << format_double(e.max_usable()) << ")\n";
    return capability;
  } catch (const CrossCheckError& e) {
    err << "cross-check failed: " << e.what() << " (worst n = " << e.worst_n() << ")\n";
    return assertion_failed;
  } catch (const PreconditionError& e) {
    err << "usage: " << e.what() << '\n';
    return usage;
  } catch (const RangeError& e) {
    err << "usage: " << e.what() << '\n';
    return usage;
  } catch (const DomainError& e) {
    err << "usage: " << e.what() << '\n';
    return usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }
}

}  // namespace mlab::cli
