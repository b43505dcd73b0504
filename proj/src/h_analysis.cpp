#include "mlab/h_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mlab/compensated.hpp"
#include "mlab/errors.hpp"
#include "mlab/format.hpp"

namespace mlab {

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Single pass over the pieces of a source.  Records samples, the running
// integrals, zeros, and the raw statistics of every interval between zeros.
class ProfileSweep {
 public:
  ProfileSweep(const PieceSource& source, std::span<const double> sample_t, HProfile& out)
      : source_(source), samples_(sample_t), out_(out) {
    const std::size_t n = samples_.size();
    out_.x_samples.reserve(n);
    out_.h_values.reserve(n);
    out_.cumulative_abs_integral.reserve(n);
    out_.cumulative_signed_integral.reserve(n);
    out_.window_max_abs_h.assign(n > 0 ? n - 1 : 0, 0.0);
    out_.window_max_abs_dh.assign(n > 0 ? n - 1 : 0, 0.0);
  }

  void operator()(const Piece& piece) {
    last_ = piece;
    have_last_ = true;
    const bool zero_piece = piece_is_zero(piece);
    const double v_lo = piece_value(piece, piece.t_lo);
    if (zero_piece || piece_value_negligible(piece, piece.t_lo)) {
      record_zero(piece.t_lo, false);
    } else if (have_prev_ && !prev_right_zero_ && sign_of(prev_right_) != sign_of(v_lo)) {
      record_zero(piece.t_lo, source_.has_jumps());
    }

    // Events inside the piece, in order: samples and interior roots.
    events_.clear();
    const bool degenerate = piece.t_hi == piece.t_lo;
    while (next_sample_ < samples_.size()) {
      const double ts = samples_[next_sample_];
      if (ts < piece.t_lo) {
        ++next_sample_;  // before the first piece; cannot happen for tiling sources
        continue;
      }
      if (ts < piece.t_hi || (degenerate && ts == piece.t_lo)) {
        events_.push_back({ts, true});
        ++next_sample_;
      } else {
        break;
      }
    }
    if (!zero_piece && !degenerate) collect_roots(piece);
    std::stable_sort(events_.begin(), events_.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });

    double cursor = piece.t_lo;
    for (const Event& e : events_) {
      advance(piece, cursor, e.t);
      cursor = e.t;
      if (e.is_sample) {
        record_sample(piece, e.t);
      } else {
        record_zero(e.t, false);
      }
    }
    advance(piece, cursor, piece.t_hi);
    prev_right_ = piece_value(piece, piece.t_hi);
    prev_right_zero_ = piece_value_negligible(piece, piece.t_hi);
    have_prev_ = true;
  }

  void finish() {
    // Samples at or beyond the end of the last piece use its right end.
    while (have_last_ && next_sample_ < samples_.size()) {
      record_sample(last_, std::min(samples_[next_sample_], last_.t_hi));
      ++next_sample_;
    }
  }

 private:
  struct Event {
    double t;
    bool is_sample;
  };

  void collect_roots(const Piece& piece) {
    double split = 0;
    double bounds[3] = {piece.t_lo, piece.t_hi, piece.t_hi};
    int n_bounds = 2;
    if (piece_critical_point(piece, piece.t_lo, piece.t_hi, split)) {
      bounds[1] = split;
      n_bounds = 3;
    }
    for (int i = 0; i + 1 < n_bounds; ++i) {
      const double c = bounds[i], d = bounds[i + 1];
      const double vc = piece_value(piece, c), vd = piece_value(piece, d);
      const bool zc = piece_value_negligible(piece, c), zd = piece_value_negligible(piece, d);
      if (!zc && !zd && sign_of(vc) != sign_of(vd)) {
        events_.push_back({bisect_root(piece, c, d), false});
      } else if (zd && !zc) {
        events_.push_back({d, false});
      }
    }
  }

  void advance(const Piece& piece, double a, double b) {
    if (!(b > a)) return;
    const double signed_part = piece_integral(piece, a, b);
    const double abs_part = piece_abs_integral(piece, a, b);
    cum_signed_.add(signed_part);
    cum_abs_.add(abs_part);
    iv_abs_.add(abs_part);
    double where = a;
    const double max_h = piece_max_abs(piece, a, b, &where);
    const double max_dh = piece_max_abs_derivative(piece, a, b);
    if (max_h > iv_max_abs_) {
      iv_max_abs_ = max_h;
      iv_max_at_ = where;
    }
    iv_max_dh_ = std::max(iv_max_dh_, max_dh);
    if (window_ >= 0 && static_cast<std::size_t>(window_) < out_.window_max_abs_h.size()) {
      out_.window_max_abs_h[window_] = std::max(out_.window_max_abs_h[window_], max_h);
      out_.window_max_abs_dh[window_] = std::max(out_.window_max_abs_dh[window_], max_dh);
    }
  }

  void record_sample(const Piece& piece, double t) {
    out_.x_samples.push_back(source_.x_of_t(t));
    out_.h_values.push_back(piece_value(piece, t));
    out_.cumulative_abs_integral.push_back(cum_abs_.value());
    out_.cumulative_signed_integral.push_back(cum_signed_.value());
    ++window_;
    if (static_cast<std::size_t>(window_) < out_.window_max_abs_h.size()) {
      const double h = std::fabs(out_.h_values.back());
      out_.window_max_abs_h[window_] = std::max(out_.window_max_abs_h[window_], h);
      out_.window_max_abs_dh[window_] =
          std::max(out_.window_max_abs_dh[window_], std::fabs(piece_dvalue_dx(piece, t)));
    }
  }

  void record_zero(double t, bool at_jump) {
    // Pieces meeting at a root can both report it, up to rounding.
    if (!out_.zeros.empty() && std::fabs(out_.zeros.back().t - t) <= 1e-13 * std::max(1.0, std::fabs(t))) return;
    ZeroPoint z{source_.x_of_t(t), t, at_jump, cum_signed_.value(), cum_abs_.value()};
    if (!out_.zeros.empty()) {
      const ZeroPoint& prev = out_.zeros.back();
      ZeroInterval iv;
      iv.a = prev.x;
      iv.b = z.x;
      iv.t_a = prev.t;
      iv.t_b = t;
      iv.integral_abs = iv_abs_.value();
      iv.h_at_xi = iv.integral_abs / (iv.b - iv.a);
      iv.max_abs_h = iv_max_abs_;
      iv.t_at_max = iv_max_at_;
      iv.local_m = iv_max_dh_;
      iv.prop4_bound = 0.5 * iv.local_m * (iv.b - iv.a) * (iv.b - iv.a);
      out_.intervals.push_back(iv);
    }
    out_.zeros.push_back(z);
    iv_abs_ = CompensatedSum{};
    iv_max_abs_ = 0.0;
    iv_max_at_ = t;
    iv_max_dh_ = 0.0;
  }

  const PieceSource& source_;
  std::span<const double> samples_;
  HProfile& out_;
  std::size_t next_sample_ = 0;
  std::ptrdiff_t window_ = -1;
  std::vector<Event> events_;
  CompensatedSum cum_abs_, cum_signed_, iv_abs_;
  double iv_max_abs_ = 0, iv_max_at_ = 0, iv_max_dh_ = 0;
  bool have_prev_ = false;
  bool prev_right_zero_ = false;
  double prev_right_ = 0;
  Piece last_;
  bool have_last_ = false;
};

// First point of each interval where |H| reaches the interval mean, found
// in one ordered pass over the pieces.  Within an interval H keeps one sign,
// so |H| is monotone between a piece's ends and its critical point.
void fill_xi(const PieceSource& source, std::vector<ZeroInterval>& ivs) {
  std::size_t i = 0;
  auto settle = [&] {
    while (i < ivs.size() && !(ivs[i].h_at_xi > 0.0)) {
      ivs[i].xi = 0.5 * (ivs[i].a + ivs[i].b);
      ++i;
    }
  };
  auto crossing = [](const Piece& p, double u, double v, double level, double& out) {
    if (std::fabs(piece_value(p, u)) >= level) {
      out = u;
      return true;
    }
    if (std::fabs(piece_value(p, v)) < level) return false;
    for (int j = 0; j < 200; ++j) {
      const double mid = u + 0.5 * (v - u);
      if (mid <= u || mid >= v) break;
      if (std::fabs(piece_value(p, mid)) < level) {
        u = mid;
      } else {
        v = mid;
      }
    }
    out = v;
    return true;
  };
  settle();
  if (i == ivs.size()) return;
  source.stream([&](const Piece& p) {
    while (i < ivs.size()) {
      ZeroInterval& iv = ivs[i];
      if (p.t_hi < iv.t_a) return;
      const double lo = std::max(p.t_lo, iv.t_a), hi = std::min(p.t_hi, iv.t_b);
      if (hi >= lo) {
        double crit = 0, t = 0;
        bool found = false;
        if (piece_critical_point(p, lo, hi, crit)) {
          found = crossing(p, lo, crit, iv.h_at_xi, t) || crossing(p, crit, hi, iv.h_at_xi, t);
        } else {
          found = crossing(p, lo, hi, iv.h_at_xi, t);
        }
        if (found) {
          iv.xi = source.x_of_t(t);
          ++i;
          settle();
          continue;
        }
      }
      if (p.t_hi < iv.t_b) return;
      // Rounding kept |H| just below its mean; the argmax is the closest point.
      iv.xi = source.x_of_t(iv.t_at_max);
      ++i;
      settle();
    }
  });
  for (; i < ivs.size(); ++i) {
    if (std::isnan(ivs[i].xi)) ivs[i].xi = source.x_of_t(ivs[i].t_at_max);
  }
}

}  // namespace

HProfile build_profile(std::shared_ptr<const PieceSource> source, std::span<const double> sample_t,
                       double tail_fraction) {
  if (!source) throw PreconditionError("build_profile: missing source");
  if (!std::is_sorted(sample_t.begin(), sample_t.end())) {
    throw PreconditionError("build_profile: samples must be ascending");
  }
  HProfile profile;
  const auto* prefix = dynamic_cast<const PrefixProfileSource*>(source.get());
  profile.synthetic = prefix == nullptr;
  if (prefix) {
    profile.kind = prefix->kind();
    profile.y_max = prefix->y_max();
  }
  profile.source = source;
  ProfileSweep sweep(*source, sample_t, profile);
  source->stream([&](const Piece& p) { sweep(p); });
  sweep.finish();
  if (prefix) {
    for (double t : sample_t) profile.y_samples.push_back(std::exp(std::min(t, source->t_max())));
  } else {
    profile.y_samples.assign(profile.x_samples.size(), kNaN);
  }
  if (!profile.empty()) profile.constants = estimate_constants(profile, tail_fraction);
  return profile;
}

HProfile build_profile(std::shared_ptr<const PrefixSums> sums, ProfileKind kind, u64 y_max,
                       int samples_per_decade, double tail_fraction) {
  if (samples_per_decade < 10) throw RangeError("build_profile: samples_per_decade must be >= 10");
  if (!sums) throw PreconditionError("build_profile: missing prefix sums");
  if (y_max == 0) throw RangeError("build_profile: y_max must be >= 1");
  if (y_max > sums->n_max()) {
    throw CapabilityError("build_profile: y_max " + std::to_string(y_max) + " exceeds the summatory cap " +
                              std::to_string(sums->n_max()),
                          static_cast<double>(sums->n_max()));
  }
  HProfile profile;
  profile.kind = kind;
  profile.y_max = y_max;
  profile.samples_per_decade = samples_per_decade;
  if (y_max == 1) return profile;

  auto source = std::make_shared<PrefixProfileSource>(sums, kind, y_max);
  profile.source = source;
  const double t_end = std::log(static_cast<double>(y_max));
  const double step = std::numbers::ln10 / samples_per_decade;
  std::vector<double> ts;
  for (int j = 0;; ++j) {
    const double t = j * step;
    if (t >= t_end) break;
    ts.push_back(t);
  }
  ts.push_back(t_end);

  ProfileSweep sweep(*source, ts, profile);
  source->stream([&](const Piece& p) { sweep(p); });
  sweep.finish();
  profile.y_samples.reserve(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) {
    profile.y_samples.push_back(j + 1 == ts.size() ? static_cast<double>(y_max) : std::exp(ts[j]));
  }
  profile.constants = estimate_constants(profile, tail_fraction);
  return profile;
}

std::vector<ZeroPoint> find_zeros(const HProfile& profile) { return profile.zeros; }

std::vector<ZeroInterval> interval_stats(const HProfile& profile, const ConstantEstimates& constants) {
  if (profile.finite_zeros_branch() || !profile.source) return {};
  std::vector<ZeroInterval> out = profile.intervals;
  fill_xi(*profile.source, out);
  for (ZeroInterval& iv : out) {
    if (constants.kappa_applicable) {
      iv.lemma2_rhs = constants.alpha_hat * (iv.b - iv.a) * (1.0 - constants.kappa * iv.h_at_xi);
    }
  }
  return out;
}

std::vector<ZeroInterval> interval_stats(const HProfile& profile) {
  return interval_stats(profile, profile.constants);
}

DerivativeValue h_derivative(const PrefixSums& sums, double y, ProfileKind kind) {
  if (!(y >= 1.0)) throw RangeError("h_derivative: y must be >= 1");
  double s = std::log(y);
  const double s_min = std::sqrt(kXMin);
  if (s < s_min) {
    s = s_min;
    y = std::exp(s);
  }
  DerivativeValue out;
  out.one_sided = std::floor(y) == y;
  const double m = static_cast<double>(sums.mertens(y));
  if (kind == ProfileKind::smoothed) {
    out.value = (m - sums.big_f(y)) * std::exp(-s) / (2.0 * s);
  } else {
    out.value = -m * std::exp(-s) / (2.0 * s);
  }
  return out;
}

ConstantEstimates estimate_constants(const HProfile& profile, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
    throw RangeError("estimate_constants: tail_fraction must lie in (0, 1)");
  }
  if (profile.empty()) throw RangeError("estimate_constants: profile has no samples");
  ConstantEstimates c;
  c.tail_fraction = tail_fraction;
  const auto& xs = profile.x_samples;
  const double x_max = xs.back();
  c.window_x_hi = x_max;
  c.window_x_lo = (1.0 - tail_fraction) * x_max;
  c.ell_window_x_lo = (1.0 - tail_fraction * tail_fraction) * x_max;

  auto window_sup = [&](double x_lo, const std::vector<double>& per_window, bool include_samples,
                        std::size_t* count) {
    double best = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j] < x_lo) continue;
      ++used;
      if (include_samples) best = std::max(best, std::fabs(profile.h_values[j]));
      if (j < per_window.size()) best = std::max(best, per_window[j]);
    }
    if (count) *count = used;
    return best;
  };
  c.alpha_hat = window_sup(c.window_x_lo, profile.window_max_abs_h, true, &c.window_samples);
  if (c.window_samples == 0) throw RangeError("estimate_constants: tail window is empty");
  c.ell_hat = window_sup(c.ell_window_x_lo, profile.window_max_abs_h, true, nullptr);
  c.m_hat_tail = window_sup(c.window_x_lo, profile.window_max_abs_dh, false, nullptr);
  c.m_hat = window_sup(xs.front(), profile.window_max_abs_dh, false, nullptr);
  c.L_hat = x_max > 0.0 ? profile.cumulative_abs_integral.back() / x_max : 0.0;

  double hi = 0.0, lo = 0.0;
  for (double v : profile.cumulative_signed_integral) {
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  for (const ZeroPoint& z : profile.zeros) {
    hi = std::max(hi, z.cum_signed);
    lo = std::min(lo, z.cum_signed);
  }
  c.M_hat = hi - lo;

  double min_width = kNaN;
  for (const ZeroInterval& iv : profile.intervals) {
    c.iota_hat = std::isnan(c.iota_hat) ? iv.h_at_xi : std::min(c.iota_hat, iv.h_at_xi);
    const double w = iv.b - iv.a;
    min_width = std::isnan(min_width) ? w : std::min(min_width, w);
  }
  c.min_interval_width = min_width;

  constexpr double kMargin = 0.1;
  constexpr double kHFloor = 1e-6;
  c.h_param = std::max(0.5 * c.m_hat * (1.0 + kMargin), kHFloor);
  if (!std::isnan(min_width) && min_width > 0.0) c.h_param = std::max(c.h_param, c.alpha_hat / min_width);
  c.epsilon = c.alpha_hat / c.h_param;
  c.kappa_applicable = c.M_hat > 0.0;
  if (c.kappa_applicable) {
    c.kappa = (2.0 * c.h_param - c.m_hat) * c.alpha_hat / (2.0 * c.M_hat * c.h_param * c.h_param);
    c.lambda_hat = c.kappa * c.iota_hat;
  }
  return c;
}

LambdaIteration lambda_iteration(double lambda, int n_steps, double alpha) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda_iteration: lambda must lie in (0, 1)");
  if (n_steps < 1) throw RangeError("lambda_iteration: n_steps must be >= 1");
  LambdaIteration it;
  it.lambda = lambda;
  it.alpha = alpha;
  it.limit = 1.0 / (1.0 - lambda);
  it.bound_limit = alpha * (1.0 - lambda);
  double lk = 1.0;
  double shrunk = alpha;
  it.steps.push_back({0, lk, alpha / lk, shrunk});
  for (int k = 1; k <= n_steps; ++k) {
    lk = 1.0 + lambda * lk;
    shrunk /= (1.0 + lambda);
    it.steps.push_back({k, lk, alpha / lk, shrunk});
  }
  return it;
}

std::vector<TailSup> mertens_tail_sups(const PrefixSums& sums, int k_lo, int k_hi) {
  std::vector<TailSup> out;
  if (k_lo < 0 || k_hi < k_lo) throw RangeError("mertens_tail_sups: need 0 <= k_lo <= k_hi");
  const u64 n_max = sums.n_max();
  std::vector<u64> starts;
  u64 p = 1;
  for (int k = 0; k <= k_hi; ++k) {
    if (k >= k_lo) {
      if (p > n_max) break;
      starts.push_back(p);
    }
    p *= 10;
  }
  if (starts.empty()) return out;
  // Per-decade maxima, then suffix maxima.
  std::vector<double> sup(starts.size(), 0.0);
  std::vector<u64> arg(starts.size(), 0);
  std::size_t band = 0;
  sums.for_each(starts.front(), n_max, [&](u64 y, const PrefixPoint& pt) {
    while (band + 1 < starts.size() && y >= starts[band + 1]) ++band;
    const double v = std::fabs(static_cast<double>(pt.M)) / static_cast<double>(y);
    if (v > sup[band] || arg[band] == 0) {
      sup[band] = v;
      arg[band] = y;
    }
  });
  for (std::size_t i = starts.size() - 1; i-- > 0;) {
    if (sup[i + 1] > sup[i]) {
      sup[i] = sup[i + 1];
      arg[i] = arg[i + 1];
    }
  }
  for (std::size_t i = 0; i < starts.size(); ++i) {
    out.push_back({k_lo + static_cast<int>(i), sup[i], arg[i]});
  }
  return out;
}

bool non_increasing(std::span<const TailSup> sups) {
  for (std::size_t i = 1; i < sups.size(); ++i) {
    if (sups[i].sup > sups[i - 1].sup) return false;
  }
  return true;
}

std::shared_ptr<const VectorPieceSource> parabolic_arches(std::span<const double> zeros, double c) {
  if (zeros.size() < 2) throw PreconditionError("parabolic_arches: need at least two zeros");
  std::vector<Piece> pieces;
  double sign = 1.0;
  for (std::size_t i = 0; i + 1 < zeros.size(); ++i) {
    const double a = zeros[i], b = zeros[i + 1];
    if (!(b > a)) throw PreconditionError("parabolic_arches: zeros must increase");
    const double k = sign * c;
    pieces.push_back({a, b, QuadraticShape{-k * a * b, k * (a + b), -k}});
    sign = -sign;
  }
  return std::make_shared<VectorPieceSource>(std::move(pieces));
}

void write_profile_csv(std::ostream& out, const HProfile& p) {
  out << "x,y,h,cum_abs,cum_signed\n";
  for (std::size_t j = 0; j < p.x_samples.size(); ++j) {
    out << format_double(p.x_samples[j]) << ',' << format_double(p.y_samples[j]) << ','
        << format_double(p.h_values[j]) << ',' << format_double(p.cumulative_abs_integral[j]) << ','
        << format_double(p.cumulative_signed_integral[j]) << '\n';
  }
}

void write_zeros_csv(std::ostream& out, const HProfile& p) {
  out << "index,x,a_or_b\n";
  const std::size_t n = p.zeros.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char* role = n == 1 ? "-" : i == 0 ? "a" : i + 1 == n ? "b" : "ab";
    out << i << ',' << format_double(p.zeros[i].x) << ',' << role << '\n';
  }
}

void write_intervals_csv(std::ostream& out, std::span<const ZeroInterval> intervals) {
  out << "a,b,integral_abs,xi,h_at_xi,prop4_bound,lemma2_rhs\n";
  for (const ZeroInterval& iv : intervals) {
    out << format_double(iv.a) << ',' << format_double(iv.b) << ',' << format_double(iv.integral_abs) << ','
        << format_double(iv.xi) << ',' << format_double(iv.h_at_xi) << ',' << format_double(iv.prop4_bound)
        << ',' << format_double(iv.lemma2_rhs) << '\n';
  }
}

}  // namespace mlab
