#include "mlab/summatory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlab/errors.hpp"
#include "mlab/format.hpp"

namespace mlab {

void PrefixSums::State::step(u64 n, int mu, double lambda) {
  if (n >= 2 && M != 0) I.add(static_cast<double>(M) * std::log1p(1.0 / static_cast<double>(n - 1)));
  M += mu;
  if (mu != 0) A.add(mu * std::log(static_cast<double>(n)));
  if (lambda != 0.0) psi.add(lambda);
}

PrefixSums::PrefixSums(std::shared_ptr<const SieveTable> sieve, std::shared_ptr<const ArithTable> conv,
                       PrefixOptions options)
    : sieve_(std::move(sieve)), conv_(std::move(conv)), stride_(options.checkpoint_stride) {
  if (!sieve_ || sieve_->n_max == 0) throw PreconditionError("PrefixSums: empty sieve table");
  if (stride_ == 0) throw RangeError("PrefixSums: checkpoint stride must be positive");
  if (conv_ && conv_->n_max > sieve_->n_max) {
    throw PreconditionError("PrefixSums: convolution table exceeds the sieve cap");
  }
  const u64 n_max = sieve_->n_max;
  const u64 rounded = (options.dense_limit + stride_ - 1) / stride_ * stride_;
  dense_limit_ = std::min(rounded, n_max);

  dense_M_.assign(dense_limit_ + 1, 0);
  dense_A_.assign(dense_limit_ + 1, 0.0);
  dense_psi_.assign(dense_limit_ + 1, 0.0);
  dense_I_.assign(dense_limit_ + 1, 0.0);
  checkpoints_.reserve(n_max / stride_ + 1);

  State s;
  checkpoints_.push_back(s);
  for (u64 n = 1; n <= n_max; ++n) {
    s.step(n, sieve_->mu[n], sieve_->lambda[n]);
    if (n <= dense_limit_) {
      const PrefixPoint p = s.point();
      dense_M_[n] = p.M;
      dense_A_[n] = p.A;
      dense_psi_[n] = p.psi;
      dense_I_[n] = p.I;
    }
    if (n % stride_ == 0) checkpoints_.push_back(s);
  }

  if (conv_) {
    ConvState c;
    conv_checkpoints_.push_back(c);
    for (u64 n = 1; n <= conv_->n_max; ++n) {
      c.theta.add(conv_->theta[n]);
      c.lambda2.add(conv_->lambda2[n]);
      if (n % stride_ == 0) conv_checkpoints_.push_back(c);
    }
  }
}

PrefixSums::State PrefixSums::replay(u64 k) const {
  const u64 c = k / stride_;
  State s = checkpoints_[c];
  for (u64 n = c * stride_ + 1; n <= k; ++n) s.step(n, sieve_->mu[n], sieve_->lambda[n]);
  return s;
}

PrefixSums::ConvState PrefixSums::conv_at(u64 k) const {
  const u64 c = k / stride_;
  ConvState s = conv_checkpoints_[c];
  for (u64 n = c * stride_ + 1; n <= k; ++n) {
    s.theta.add(conv_->theta[n]);
    s.lambda2.add(conv_->lambda2[n]);
  }
  return s;
}

PrefixPoint PrefixSums::at(u64 k) const {
  if (k > n_max()) {
    throw CapabilityError("argument " + std::to_string(k) + " exceeds n_max " + std::to_string(n_max()),
                          static_cast<double>(n_max()));
  }
  if (k <= dense_limit_) return {dense_M_[k], dense_A_[k], dense_psi_[k], dense_I_[k]};
  return replay(k).point();
}

u64 PrefixSums::checked_floor(double x, double min_x, const char* what) const {
  if (!(x >= min_x)) {
    throw RangeError(std::string(what) + ": argument " + format_double(x) + " below " +
                     format_double(min_x));
  }
  if (x >= static_cast<double>(n_max()) + 1.0) {
    throw CapabilityError(std::string(what) + ": argument " + format_double(x) + " exceeds n_max " +
                              std::to_string(n_max()),
                          static_cast<double>(n_max()));
  }
  return static_cast<u64>(std::floor(x));
}

i64 PrefixSums::mertens(double x) const { return at(checked_floor(x, 1.0, "mertens")).M; }

double PrefixSums::sum_mu_log(double x) const { return at(checked_floor(x, 1.0, "sum_mu_log")).A; }

double PrefixSums::psi(double x) const { return at(checked_floor(x, 1.0, "psi")).psi; }

double PrefixSums::sum_theta(double x) const {
  const u64 k = checked_floor(x, 1.0, "sum_theta");
  if (k > conv_cap()) {
    throw CapabilityError("sum_theta: argument exceeds the convolution cap " + std::to_string(conv_cap()),
                          static_cast<double>(conv_cap()));
  }
  return conv_at(k).theta.value();
}

double PrefixSums::sum_lambda2(double x) const {
  const u64 k = checked_floor(x, 1.0, "sum_lambda2");
  if (k > conv_cap()) {
    throw CapabilityError("sum_lambda2: argument exceeds the convolution cap " + std::to_string(conv_cap()),
                          static_cast<double>(conv_cap()));
  }
  return conv_at(k).lambda2.value();
}

double PrefixSums::big_f_at(const PrefixPoint& p, double x) {
  return static_cast<double>(p.M) * std::log(x) - p.A;
}

double PrefixSums::big_f_integral_at(const PrefixPoint& p, u64 k, double x) {
  return p.I + static_cast<double>(p.M) * std::log(x / static_cast<double>(k));
}

double PrefixSums::big_f(double x) const { return big_f_at(at(checked_floor(x, 1.0, "big_f")), x); }

double PrefixSums::big_f_integral(double x) const {
  const u64 k = checked_floor(x, 1.0, "big_f_integral");
  return big_f_integral_at(at(k), k, x);
}

std::vector<PrefixPoint> PrefixSums::at_sorted(std::span<const u64> ks) const {
  std::vector<PrefixPoint> out(ks.size());
  if (ks.empty()) return out;
  if (!std::is_sorted(ks.begin(), ks.end())) throw PreconditionError("at_sorted: arguments must be ascending");
  if (ks.front() == 0) throw RangeError("at_sorted: arguments must be >= 1");
  std::size_t i = 0;
  for (; i < ks.size() && ks[i] <= dense_limit_; ++i) out[i] = at(ks[i]);
  if (i == ks.size()) return out;
  for_each(ks[i], ks.back(), [&](u64 k, const PrefixPoint& p) {
    while (i < ks.size() && ks[i] == k) out[i++] = p;
  });
  return out;
}

double PrefixSums::h_smoothed(double y) const {
  checked_floor(y, 1.0, "h_smoothed");
  return big_f(y) / y;
}

double PrefixSums::h_mertens(double y) const {
  return static_cast<double>(mertens(y)) / y;
}

double PrefixSums::f_sum(double x) const {
  const u64 k = checked_floor(x, 1.0, "f_sum");
  const double log_x = std::log(x);
  CompensatedSum s;
  for (u64 n = 1; n <= k;) {
    const u64 q = k / n;
    const u64 n2 = k / q;
    const double count = static_cast<double>(n2 - n + 1);
    const PrefixPoint p = at(q);
    s.add(static_cast<double>(p.M) * (count * log_x - sum_log_range(n, n2)) - count * p.A);
    n = n2 + 1;
  }
  return s.value();
}

double PrefixSums::g_weighted(double x) const {
  checked_floor(x, 1.0, "g_weighted");
  return std::log(x) * f_sum(x);
}

ValueRemainder PrefixSums::log_square_sum(double x) const {
  if (!(x >= 1.0)) throw RangeError("log_square_sum: x must be >= 1");
  const u64 k = static_cast<u64>(std::floor(x));
  const double log_x = std::log(x);
  CompensatedSum s;
  for (u64 n = 1; n <= k; ++n) {
    const double l = log_x - std::log(static_cast<double>(n));
    s.add(l * l);
  }
  return {s.value(), s.value() - 2.0 * x};
}

ValueRemainder PrefixSums::lambda_over_n_sum(double x) const {
  const u64 k = checked_floor(x, 2.0, "lambda_over_n_sum");
  CompensatedSum s;
  for (u64 n = 2; n <= k; ++n) {
    const double l = sieve_->lambda[n];
    if (l != 0.0) s.add(l / static_cast<double>(n));
  }
  return {s.value(), s.value() - std::log(x)};
}

void PrefixSums::for_each(u64 lo, u64 hi, const std::function<void(u64, const PrefixPoint&)>& fn) const {
  if (lo == 0) lo = 1;
  if (hi > n_max()) {
    throw CapabilityError("for_each: range exceeds n_max " + std::to_string(n_max()),
                          static_cast<double>(n_max()));
  }
  u64 k = lo;
  for (; k <= hi && k <= dense_limit_; ++k) {
    fn(k, PrefixPoint{dense_M_[k], dense_A_[k], dense_psi_[k], dense_I_[k]});
  }
  if (k > hi) return;
  State s = replay(k - 1);
  for (; k <= hi; ++k) {
    s.step(k, sieve_->mu[k], sieve_->lambda[k]);
    fn(k, s.point());
  }
}

double sum_log_range(u64 a, u64 b) {
  if (a == 0) throw RangeError("sum_log_range: a must be >= 1");
  if (b < a) return 0.0;
  CompensatedSum s;
  u64 n = a;
  for (; n <= b && n < 64; ++n) s.add(std::log(static_cast<double>(n)));
  if (n > b) return s.value();
  // log b! - log (n-1)! from Stirling's series, arranged to avoid cancellation.
  const double m = static_cast<double>(n - 1);
  const double top = static_cast<double>(b);
  const double count = static_cast<double>(b - (n - 1));
  auto corr = [](double t) {
    const double t2 = t * t;
    return 1.0 / (12.0 * t) - 1.0 / (360.0 * t * t2) + 1.0 / (1260.0 * t * t2 * t2);
  };
  s.add(count * std::log(top));
  s.add((m + 0.5) * std::log1p(count / m));
  s.add(-count);
  s.add(corr(top) - corr(m));
  return s.value();
}

double x_from_y(double y) {
  const double l = std::log(y);
  return l * l;
}

double y_from_x(double x) { return std::exp(std::sqrt(x)); }

void write_summatory_csv(std::ostream& out, const PrefixSums& sums, std::span<const double> xs) {
  out << "x,M,F_sum,F_integral,psi,S_lambda2\n";
  for (double x : xs) {
    out << format_double(x) << ',' << sums.mertens(x) << ',' << format_double(sums.big_f(x)) << ','
        << format_double(sums.big_f_integral(x)) << ',' << format_double(sums.psi(x)) << ',';
    if (x < static_cast<double>(sums.conv_cap()) + 1.0) out << format_double(sums.sum_lambda2(x));
    out << '\n';
  }
}

}  // namespace mlab
