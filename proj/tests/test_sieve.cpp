#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mlab/errors.hpp"
#include "mlab/segment_cache.hpp"
#include "mlab/sieve.hpp"
#include "oracle.hpp"

using namespace mlab;

namespace {

std::filesystem::path temp_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("isqrt is exact at perfect squares and their neighbours") {
  for (u64 r : {u64{0}, u64{1}, u64{2}, u64{1000}, u64{4294967295}}) {
    CHECK(isqrt(r * r) == r);
    if (r > 0) CHECK(isqrt(r * r - 1) == r - 1);
  }
  CHECK(isqrt(~u64{0}) == 4294967295u);
}

TEST_CASE("segment holding only 1 carries the sentinel") {
  auto seg = build_segment(1, 2, {});
  REQUIRE(seg.size() == 1);
  CHECK(seg.lpf[0] == 1);
  CHECK(seg.lpf_mult[0] == 0);
}

TEST_CASE("least prime factors of 2..10") {
  auto primes = primes_up_to(10);
  auto seg = build_segment(2, 11, primes);
  std::vector<u64> expect = {2, 3, 2, 5, 2, 7, 2, 3, 2};
  CHECK(seg.lpf == expect);
}

TEST_CASE("10^6 = 2^6 5^6") {
  auto primes = primes_up_to(1001);
  auto seg = build_segment(1'000'000, 1'000'008, primes);
  CHECK(seg.lpf[0] == 2);
  CHECK(seg.lpf_mult[0] == 6);
  for (u64 n = seg.lo; n < seg.hi; ++n) {
    auto [p, e] = oracle::lpf(n);
    CHECK(seg.lpf[n - seg.lo] == p);
    CHECK(seg.lpf_mult[n - seg.lo] == e);
  }
}

TEST_CASE("segment errors") {
  auto primes = primes_up_to(100);
  CHECK_THROWS_AS(build_segment(10, 10, primes), RangeError);
  CHECK_THROWS_AS(build_segment(10, 5, primes), RangeError);
  CHECK_THROWS_AS(build_segment(0, 5, primes), RangeError);
  CHECK_THROWS_AS(build_segment(1, 200, primes_up_to(7)), PreconditionError);
  CHECK_NOTHROW(build_segment(1, 122, primes_up_to(11)));
}

TEST_CASE("mobius and von Mangoldt hand values") {
  auto seg = build_segment(1, 31, primes_up_to(6));
  auto mu = mobius_from_segment(seg);
  auto lam = lambda_from_segment(seg);
  CHECK(mu[0] == 1);
  std::vector<int> expect = {-1, -1, 0, -1, 1, -1, 0, 0, 1};
  for (int n = 2; n <= 10; ++n) CHECK(mu[n - 1] == expect[n - 2]);
  CHECK(mu[29] == -1);
  CHECK(lam[0] == 0.0);
  CHECK(lam[7] == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(lam[5] == 0.0);
  // log p is computed the same way for every power of p
  CHECK(lam[1] == lam[3]);
  CHECK(lam[1] == lam[7]);
  CHECK(lam[1] == lam[15]);
}

TEST_CASE("sieve table matches trial division up to 10^5") {
  const u64 n = 100'000;
  SieveOptions opt;
  opt.segment_size = 4097;
  opt.threads = 3;
  auto t = sieve_table(n, opt);
  REQUIRE(t.mu.size() == n + 1);
  for (u64 k = 1; k <= n; ++k) {
    REQUIRE(t.mu[k] == oracle::mobius(k));
    REQUIRE(t.lambda[k] == doctest::Approx(oracle::mangoldt(k)).epsilon(1e-15));
  }
}

TEST_CASE("sieve output does not depend on segment size or thread count") {
  const u64 n = 300'000;
  SieveOptions a;
  a.segment_size = 1000;
  a.threads = 1;
  SieveOptions b;
  b.segment_size = 65536;
  b.threads = 4;
  auto ta = sieve_table(n, a);
  auto tb = sieve_table(n, b);
  auto tc = sieve_table(n);
  CHECK(ta.mu == tb.mu);
  CHECK(ta.lambda == tb.lambda);
  CHECK(ta.mu == tc.mu);
  CHECK(ta.lambda == tc.lambda);
}

TEST_CASE("linear sieve agrees with the segmented sieve") {
  const u64 n = 1'000'000;
  auto lin = linear_sieve_mobius(n);
  auto seg = sieve_table(n);
  CHECK(lin == seg.mu);
}

TEST_CASE("squarefree density at 10^6") {
  const u64 n = 1'000'000;
  auto t = sieve_table(n);
  u64 count = 0, oracle_count = 0;
  auto small = primes_up_to(1000);
  for (u64 k = 1; k <= n; ++k) {
    count += t.mu[k] != 0;
    bool sqfree = true;
    for (u64 p : small) {
      if (p * p > k) break;
      if (k % (p * p) == 0) {
        sqfree = false;
        break;
      }
    }
    oracle_count += sqfree;
  }
  CHECK(count == oracle_count);
  CHECK(std::fabs(static_cast<double>(count) / n - 6.0 / (M_PI * M_PI)) < 1e-3);
  CHECK(std::fabs(static_cast<double>(count) / n - 0.607927) < 1e-3);
}

TEST_CASE("sieve table limits") {
  CHECK_THROWS_AS(sieve_table(u64{1} << 33), CapabilityError);
  CHECK_THROWS_AS(sieve_table(0), RangeError);
  auto t = sieve_table(1);
  CHECK(t.mu[1] == 1);
}

TEST_CASE("cache header round trip") {
  cache::Header h{cache::kFormatVersion, 12345, 67890};
  auto bytes = cache::encode_header(h);
  CHECK(bytes[0] == 'M');
  CHECK(bytes[3] == 'B');
  CHECK(bytes[4] == 1);  // little-endian version
  auto back = cache::decode_header(bytes);
  REQUIRE(back.has_value());
  CHECK(back->lo == 12345);
  CHECK(back->hi == 67890);
  bytes[0] = 'X';
  CHECK_FALSE(cache::decode_header(bytes).has_value());
}

TEST_CASE("cached segments reproduce the sieve and reject mismatched files") {
  auto dir = temp_dir("mlab_test_cache");
  SieveOptions opt;
  opt.segment_size = 10'000;
  opt.cache_dir = dir;
  auto first = sieve_table(50'000, opt);
  CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 5);
  auto second = sieve_table(50'000, opt);
  CHECK(first.mu == second.mu);
  CHECK(first.lambda == second.lambda);

  // a corrupted cache file is ignored and the sieve is recomputed
  auto victim = std::filesystem::directory_iterator(dir)->path();
  {
    std::ofstream f(victim, std::ios::binary | std::ios::trunc);
    f << "garbage";
  }
  auto third = sieve_table(50'000, opt);
  CHECK(third.mu == first.mu);

  auto primes = primes_up_to(1000);
  auto seg = build_segment(10'000, 20'000, primes);
  auto file = dir / "seg.bin";
  cache::write_segment(file, seg);
  auto read = cache::read_segment(file, 10'000, 20'000, primes);
  REQUIRE(read.has_value());
  CHECK(read->lpf == seg.lpf);
  CHECK(read->lpf_mult == seg.lpf_mult);
  CHECK_FALSE(cache::read_segment(file, 10'000, 20'001, primes).has_value());
  CHECK_FALSE(cache::read_segment(dir / "missing.bin", 10'000, 20'000, primes).has_value());

  // a truncated payload is rejected
  std::filesystem::resize_file(file, std::filesystem::file_size(file) - 1);
  CHECK_FALSE(cache::read_segment(file, 10'000, 20'000, primes).has_value());

  std::filesystem::remove_all(dir);
}
