#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "mlab/errors.hpp"
#include "mlab/h_analysis.hpp"
#include "mlab/identities.hpp"
#include "oracle.hpp"

using namespace mlab;

namespace {

std::shared_ptr<const PrefixSums> sums() {
  static const auto s =
      std::make_shared<const PrefixSums>(std::make_shared<const SieveTable>(sieve_table(300'000)));
  return s;
}

const double l2 = std::log(2.0);

/// Piecewise-linear interpolation of a table, one piece per unit of x.
std::shared_ptr<const VectorPieceSource> linear_table(const std::vector<double>& v) {
  std::vector<Piece> pieces;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    const double c1 = v[j + 1] - v[j];
    pieces.push_back({double(j), double(j + 1), QuadraticShape{v[j] - c1 * double(j), c1, 0.0}});
  }
  return std::make_shared<VectorPieceSource>(std::move(pieces));
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(a + (b - a) * i / n);
  return out;
}

}  // namespace

TEST_CASE("tiny profiles") {
  auto p2 = build_profile(sums(), ProfileKind::smoothed, 2, 10);
  REQUIRE_FALSE(p2.empty());
  CHECK(p2.x_samples.back() == doctest::Approx(l2 * l2).epsilon(1e-15));
  CHECK(p2.h_values.back() == doctest::Approx(l2 / 2).epsilon(1e-14));
  CHECK(p2.y_samples.back() == 2.0);
  CHECK(p2.h_values.front() == 0.0);

  auto p1 = build_profile(sums(), ProfileKind::smoothed, 1, 10);
  CHECK(p1.empty());
  CHECK(p1.zeros.empty());
  CHECK(interval_stats(p1).empty());

  auto pm = build_profile(sums(), ProfileKind::mertens, 10, 10);
  CHECK(pm.h_values.back() == doctest::Approx(-0.1).epsilon(1e-14));

  CHECK_THROWS_AS(build_profile(sums(), ProfileKind::smoothed, 100, 9), RangeError);
  CHECK_THROWS_AS(build_profile(sums(), ProfileKind::smoothed, 300'001, 10), CapabilityError);
}

TEST_CASE("Mertens profile zero at the first step where M vanishes") {
  auto p = build_profile(sums(), ProfileKind::mertens, 10, 20);
  REQUIRE_FALSE(p.zeros.empty());
  CHECK(p.zeros.front().x == doctest::Approx(l2 * l2).epsilon(1e-14));
  // M = 1, 0, -1, ..., -1 on y = 1..10: the single zero is the step where M vanishes
  CHECK(p.zeros.size() == 1);
}

TEST_CASE("smoothed profile invariants") {
  auto p = build_profile(sums(), ProfileKind::smoothed, 300'000, 50);
  const auto& s = *sums();
  for (std::size_t j = 0; j < p.x_samples.size(); ++j) {
    REQUIRE(std::fabs(p.h_values[j]) <= 1.0 + 1e-9);
    REQUIRE(p.h_values[j] == doctest::Approx(s.h_smoothed(p.y_samples[j])).epsilon(1e-12).scale(1));
    if (j > 0) {
      REQUIRE(p.x_samples[j] > p.x_samples[j - 1]);
      REQUIRE(p.cumulative_abs_integral[j] >= p.cumulative_abs_integral[j - 1]);
    }
  }
  for (std::size_t j = 0; j < p.x_samples.size(); j += 37) {
    CHECK(p.cumulative_abs_integral[j] ==
          doctest::Approx(h_abs_integral(s, p.y_samples[j], ProfileKind::smoothed)).epsilon(1e-10).scale(1e-12));
  }
  // zeros are roots of F and the sign is constant between them
  for (std::size_t i = 0; i < p.zeros.size(); ++i) {
    const double y = y_from_x(p.zeros[i].x);
    CHECK(std::fabs(s.big_f(y)) <= 1e-9 * y);
    if (i > 0) CHECK(p.zeros[i].x > p.zeros[i - 1].x);
  }
  for (std::size_t i = 0; i + 1 < p.zeros.size(); ++i) {
    int sign = 0;
    for (std::size_t j = 0; j < p.x_samples.size(); ++j) {
      if (p.x_samples[j] <= p.zeros[i].x * (1 + 1e-9) || p.x_samples[j] >= p.zeros[i + 1].x * (1 - 1e-9)) continue;
      const int sj = (p.h_values[j] > 0) - (p.h_values[j] < 0);
      if (sign == 0) sign = sj;
      REQUIRE(sj == sign);
    }
  }
  CHECK(p.zeros.size() >= 2);
  CHECK(p.constants.alpha_hat <= 1.0);
  CHECK(p.constants.ell_hat <= p.constants.alpha_hat + 1e-9);
}

TEST_CASE("zero intervals of the smoothed profile") {
  auto p = build_profile(sums(), ProfileKind::smoothed, 300'000, 50);
  auto ivs = interval_stats(p);
  REQUIRE(ivs.size() == p.zeros.size() - 1);
  const auto& s = *sums();
  for (const auto& iv : ivs) {
    CHECK(iv.a < iv.b);
    CHECK(iv.integral_abs >= 0.0);
    CHECK(iv.h_at_xi * (iv.b - iv.a) == doctest::Approx(iv.integral_abs).epsilon(1e-12));
    CHECK(iv.h_at_xi <= iv.max_abs_h + 1e-12);
    CHECK(iv.integral_abs <= iv.prop4_bound);
    CHECK(iv.integral_abs <= 0.5 * p.constants.m_hat * (iv.b - iv.a) * (iv.b - iv.a) + 1e-15);
    CHECK(iv.xi > iv.a);
    CHECK(iv.xi < iv.b);
    // continuous profile: |H(xi)| is the mean value
    CHECK(std::fabs(s.h_smoothed(y_from_x(iv.xi))) == doctest::Approx(iv.h_at_xi).epsilon(1e-8));
    CHECK(std::isfinite(iv.lemma2_rhs));
  }
}

TEST_CASE("linear sign table: zeros match the oracle") {
  std::vector<double> v;
  for (int j = 0; j <= 40; ++j) v.push_back(std::sin(0.7 * j + 0.3));
  std::vector<double> roots;
  for (std::size_t j = 0; j + 1 < v.size(); ++j)
    if ((v[j] > 0) != (v[j + 1] > 0)) roots.push_back(double(j) + v[j] / (v[j] - v[j + 1]));
  auto p = build_profile(linear_table(v), linspace(0, 40, 400));
  CHECK(p.synthetic);
  REQUIRE(p.zeros.size() == roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) CHECK(p.zeros[i].x == doctest::Approx(roots[i]).epsilon(1e-12));
}

TEST_CASE("constant sign gives no zeros") {
  std::vector<double> v = {0.1, 0.5, 0.2, 0.9, 0.3};
  auto p = build_profile(linear_table(v), linspace(0, 4, 40));
  CHECK(p.zeros.empty());
  CHECK(p.finite_zeros_branch());
  CHECK(interval_stats(p).empty());
}

TEST_CASE("parabolic arches") {
  const std::vector<double> zs = {0.5, 1.75, 2.0, 4.5, 5.25, 9.0};
  const double c = 0.8;
  auto p = build_profile(parabolic_arches(zs, c), linspace(0.5, 9, 90));
  REQUIRE(p.zeros.size() == zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) CHECK(std::fabs(p.zeros[i].x - zs[i]) <= 1e-10 * zs[i]);
  auto ivs = interval_stats(p);
  REQUIRE(ivs.size() == zs.size() - 1);
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    const double w = zs[i + 1] - zs[i];
    CHECK(ivs[i].integral_abs == doctest::Approx(c * w * w * w / 6).epsilon(1e-9));
    CHECK(ivs[i].local_m == doctest::Approx(c * w).epsilon(1e-9));
    CHECK(ivs[i].integral_abs / ivs[i].prop4_bound == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    // symmetric arch: the mean value c w^2 / 6 is reached at a - relative offset (1 - 1/sqrt 3) / 2
    const double off = w * (1 - 1 / std::sqrt(3.0)) / 2;
    const double xi = ivs[i].xi;
    CHECK(std::min(std::fabs(xi - zs[i] - off), std::fabs(zs[i + 1] - off - xi)) <= 1e-9 * w);
  }
  CHECK_THROWS_AS(parabolic_arches(std::vector<double>{1.0}, c), PreconditionError);
  CHECK_THROWS_AS(parabolic_arches(std::vector<double>{1.0, 1.0}, c), PreconditionError);
}

TEST_CASE("identically zero profile") {
  std::vector<Piece> pieces = {{0, 1, QuadraticShape{}}, {1, 3, QuadraticShape{}}};
  auto p = build_profile(std::make_shared<VectorPieceSource>(pieces), linspace(0, 3, 30));
  const auto& k = p.constants;
  CHECK(k.alpha_hat == 0.0);
  CHECK(k.ell_hat == 0.0);
  CHECK(k.L_hat == 0.0);
  CHECK(k.m_hat == 0.0);
  CHECK(k.M_hat == 0.0);
  CHECK(k.h_param > 0.0);
  CHECK_FALSE(k.kappa_applicable);
  CHECK(std::isnan(k.kappa));
  for (const auto& iv : interval_stats(p)) {
    CHECK(iv.integral_abs == 0.0);
    CHECK(iv.h_at_xi == 0.0);
    CHECK(iv.integral_abs <= iv.prop4_bound);
  }
}

TEST_CASE("constant estimates") {
  auto p = build_profile(sums(), ProfileKind::smoothed, 300'000, 50);
  const auto& k = p.constants;
  CHECK(k.alpha_hat <= 1.0);
  CHECK(k.ell_hat <= k.alpha_hat + 1e-9);
  CHECK(k.h_param > k.m_hat / 2);
  CHECK(k.epsilon == doctest::Approx(k.alpha_hat / k.h_param));
  REQUIRE(k.kappa_applicable);
  CHECK(k.kappa ==
        doctest::Approx((2 * k.h_param - k.m_hat) * k.alpha_hat / (2 * k.M_hat * k.h_param * k.h_param)));
  // M_hat is the largest |int_{x1}^{x2} H| over samples and zeros
  std::vector<double> cum = p.cumulative_signed_integral;
  for (const auto& z : p.zeros) cum.push_back(z.cum_signed);
  double best = 0;
  for (std::size_t i = 0; i < cum.size(); ++i)
    for (std::size_t j = i + 1; j < cum.size(); ++j) best = std::max(best, std::fabs(cum[j] - cum[i]));
  CHECK(k.M_hat == best);
  CHECK_THROWS_AS(estimate_constants(p, 0.0), RangeError);
  CHECK_THROWS_AS(estimate_constants(p, 1.0), RangeError);
}

TEST_CASE("derivative against finite differences") {
  const auto& s = *sums();
  // y = 2.5 by hand: M = 0, F = log 2.5 - log 1.25
  auto d = h_derivative(s, 2.5);
  const double f = std::log(2.5) - std::log(1.25);
  CHECK(d.value == doctest::Approx((0 - f) / (2 * std::log(2.5) * 2.5)).epsilon(1e-14));
  CHECK_FALSE(d.one_sided);
  CHECK(h_derivative(s, 7).one_sided);
  CHECK(std::isfinite(h_derivative(s, 1.0).value));
  CHECK(std::isfinite(h_derivative(s, 1.0 + 1e-12).value));
  CHECK_THROWS_AS(h_derivative(s, 0.9), RangeError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(std::log(2.0), std::log(299'000.0));
  for (int i = 0; i < 100; ++i) {
    const double y = std::exp(u(rng));
    const double x = x_from_y(y), h = 1e-6;
    if (std::floor(y_from_x(x - h)) != std::floor(y_from_x(x + h))) continue;
    for (auto kind : {ProfileKind::smoothed, ProfileKind::mertens}) {
      auto H = [&](double xx) {
        const double yy = y_from_x(xx);
        return kind == ProfileKind::smoothed ? s.h_smoothed(yy) : s.h_mertens(yy);
      };
      const double fd = (H(x + h) - H(x - h)) / (2 * h);
      REQUIRE(std::fabs(h_derivative(s, y, kind).value - fd) <= 1e-4);
    }
  }
}

TEST_CASE("lambda iteration") {
  auto it = lambda_iteration(0.5, 50);
  REQUIRE(it.steps.size() == 51);
  CHECK(it.steps[0].lambda_k == 1.0);
  CHECK(it.steps[1].lambda_k == 1.5);
  CHECK(it.steps[2].lambda_k == 1.75);
  CHECK(it.steps[3].lambda_k == 1.875);
  CHECK(it.limit == 2.0);
  CHECK(std::fabs(it.steps[50].lambda_k - 2.0) <= 1e-12);
  CHECK(it.bound_limit == 0.5);
  for (double lam : {0.1, 0.5, 0.9}) {
    auto r = lambda_iteration(lam, 60, 0.7);
    for (std::size_t k = 1; k < r.steps.size(); ++k) {
      CHECK(r.steps[k].lambda_k >= r.steps[k - 1].lambda_k);
      CHECK(std::fabs(r.steps[k].lambda_k - r.limit) <= std::pow(lam, double(k)) * std::fabs(1 - r.limit) + 1e-15);
      CHECK(r.steps[k].bound == doctest::Approx(0.7 / r.steps[k].lambda_k));
      CHECK(r.steps[k].alpha_shrunk == doctest::Approx(0.7 / std::pow(1 + lam, double(k))));
    }
  }
  auto tiny = lambda_iteration(1e-12, 5);
  for (const auto& st : tiny.steps) CHECK(st.lambda_k == doctest::Approx(1.0));
  CHECK_THROWS_AS(lambda_iteration(0.0, 5), DomainError);
  CHECK_THROWS_AS(lambda_iteration(1.0, 5), DomainError);
  CHECK_THROWS_AS(lambda_iteration(0.5, 0), RangeError);
}

TEST_CASE("Mertens tail sups") {
  const auto& s = *sums();
  auto t = mertens_tail_sups(s, 2, 7);
  REQUIRE(t.size() == 4);  // 10^2 .. 10^5 lie below n_max
  for (const auto& e : t) {
    double best = 0;
    for (u64 y = 1; y <= 300'000; ++y)
      if (y >= std::pow(10.0, e.k)) best = std::max(best, std::fabs(double(s.mertens(double(y)))) / double(y));
    CHECK(e.sup == best);
    CHECK(std::fabs(double(s.mertens(double(e.argmax_y)))) / double(e.argmax_y) == best);
  }
  CHECK(non_increasing(t));
  std::vector<TailSup> up = {{2, 0.1, 0}, {3, 0.2, 0}};
  CHECK_FALSE(non_increasing(up));
  CHECK_THROWS_AS(mertens_tail_sups(s, 3, 2), RangeError);
}

TEST_CASE("profile CSV writers") {
  auto p = build_profile(parabolic_arches(std::vector<double>{0, 1, 2}, 1.0), linspace(0, 2, 4));
  std::ostringstream a, b, c;
  write_profile_csv(a, p);
  write_zeros_csv(b, p);
  write_intervals_csv(c, interval_stats(p));
  CHECK(a.str().rfind("x,y,h,cum_abs,cum_signed\n", 0) == 0);
  CHECK(b.str() == "index,x,a_or_b\n0,0,a\n1,1,ab\n2,2,b\n");
  CHECK(c.str().rfind("a,b,integral_abs,xi,h_at_xi,prop4_bound,lemma2_rhs\n0,1,", 0) == 0);
}
