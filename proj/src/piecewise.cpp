#include "mlab/piecewise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mlab/errors.hpp"

namespace mlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// int_a^b s e^{-s} ds and int_a^b s^2 e^{-s} ds, written in terms of
// delta = b - a so that narrow intervals keep their relative accuracy.
double exp_moment1(double a, double b) {
  const double d = b - a;
  return std::exp(-a) * (-(a + 1.0) * std::expm1(-d) - d * std::exp(-d));
}

double exp_moment2(double a, double b) {
  const double d = b - a;
  return std::exp(-a) * (-(a * a + 2.0 * a + 2.0) * std::expm1(-d) - d * (2.0 * a + d + 2.0) * std::exp(-d));
}

// Roots of H strictly inside (a, b), ascending.  At most two.
int interior_roots(const Piece& piece, double a, double b, std::array<double, 2>& out) {
  int n = 0;
  auto keep = [&](double r) {
    if (r > a && r < b) out[n++] = r;
  };
  std::visit(Overloaded{
                 [&](const ExpLinearShape& s) {
                   if (s.p != 0.0) keep(-s.q / s.p);
                 },
                 [&](const QuadraticShape& s) {
                   if (s.c2 == 0.0) {
                     if (s.c1 != 0.0) keep(-s.c0 / s.c1);
                     return;
                   }
                   const double disc = s.c1 * s.c1 - 4.0 * s.c2 * s.c0;
                   if (disc < 0.0) return;
                   const double sq = std::sqrt(disc);
                   const double qq = -0.5 * (s.c1 + std::copysign(sq, s.c1));
                   double r1 = qq / s.c2;
                   double r2 = qq != 0.0 ? s.c0 / qq : r1;
                   if (r1 > r2) std::swap(r1, r2);
                   keep(r1);
                   if (r2 != r1) keep(r2);
                 },
             },
             piece.shape);
  return n;
}

}  // namespace

double piece_x(const Piece& piece, double t) {
  return std::holds_alternative<ExpLinearShape>(piece.shape) ? t * t : t;
}

double piece_t(const Piece& piece, double x) {
  return std::holds_alternative<ExpLinearShape>(piece.shape) ? std::sqrt(x) : x;
}

double piece_value(const Piece& piece, double t) {
  return std::visit(Overloaded{
                        [t](const ExpLinearShape& s) { return (s.p * t + s.q) * std::exp(-t); },
                        [t](const QuadraticShape& s) { return s.c0 + t * (s.c1 + t * s.c2); },
                    },
                    piece.shape);
}

double piece_dvalue_dx(const Piece& piece, double t) {
  return std::visit(Overloaded{
                        [t](const ExpLinearShape& s) {
                          const double se = std::max(t, std::sqrt(kXMin));
                          return (s.p - s.q - s.p * se) * std::exp(-se) / (2.0 * se);
                        },
                        [t](const QuadraticShape& s) {
                          const double x = std::max(t, kXMin);
                          return s.c1 + 2.0 * s.c2 * x;
                        },
                    },
                    piece.shape);
}

bool piece_is_zero(const Piece& piece) {
  return std::visit(Overloaded{
                        [](const ExpLinearShape& s) { return s.p == 0.0 && s.q == 0.0; },
                        [](const QuadraticShape& s) { return s.c0 == 0.0 && s.c1 == 0.0 && s.c2 == 0.0; },
                    },
                    piece.shape);
}

bool piece_value_negligible(const Piece& piece, double t) {
  const double scale = std::visit(Overloaded{
                                      [t](const ExpLinearShape& s) {
                                        return (std::fabs(s.p * t) + std::fabs(s.q)) * std::exp(-t);
                                      },
                                      [t](const QuadraticShape& s) {
                                        return std::fabs(s.c0) + std::fabs(s.c1 * t) + std::fabs(s.c2 * t * t);
                                      },
                                  },
                                  piece.shape);
  return std::fabs(piece_value(piece, t)) <= 16.0 * std::numeric_limits<double>::epsilon() * scale;
}

bool piece_critical_point(const Piece& piece, double t_a, double t_b, double& t_crit) {
  double c = std::numeric_limits<double>::quiet_NaN();
  std::visit(Overloaded{
                 [&](const ExpLinearShape& s) {
                   if (s.p != 0.0) c = 1.0 - s.q / s.p;
                 },
                 [&](const QuadraticShape& s) {
                   if (s.c2 != 0.0) c = -s.c1 / (2.0 * s.c2);
                 },
             },
             piece.shape);
  if (c > t_a && c < t_b) {
    t_crit = c;
    return true;
  }
  return false;
}

double piece_integral(const Piece& piece, double t_a, double t_b) {
  if (t_b == t_a) return 0.0;
  return std::visit(Overloaded{
                        [&](const ExpLinearShape& s) {
                          return 2.0 * (s.p * exp_moment2(t_a, t_b) + s.q * exp_moment1(t_a, t_b));
                        },
                        [&](const QuadraticShape& s) {
                          const double d = t_b - t_a;
                          return d * (s.c0 + s.c1 * 0.5 * (t_a + t_b) +
                                      s.c2 * (t_a * t_a + t_a * t_b + t_b * t_b) / 3.0);
                        },
                    },
                    piece.shape);
}

double piece_abs_integral(const Piece& piece, double t_a, double t_b) {
  if (t_b <= t_a) return 0.0;
  std::array<double, 2> roots{};
  const int n = interior_roots(piece, t_a, t_b, roots);
  double total = 0.0;
  double lo = t_a;
  for (int i = 0; i < n; ++i) {
    total += std::fabs(piece_integral(piece, lo, roots[i]));
    lo = roots[i];
  }
  total += std::fabs(piece_integral(piece, lo, t_b));
  return total;
}

double piece_max_abs(const Piece& piece, double t_a, double t_b, double* where) {
  double best = std::fabs(piece_value(piece, t_a));
  double at = t_a;
  auto consider = [&](double t) {
    const double v = std::fabs(piece_value(piece, t));
    if (v > best) {
      best = v;
      at = t;
    }
  };
  consider(t_b);
  double crit = 0;
  if (piece_critical_point(piece, t_a, t_b, crit)) consider(crit);
  if (where) *where = at;
  return best;
}

double piece_max_abs_derivative(const Piece& piece, double t_a, double t_b) {
  double best = std::max(std::fabs(piece_dvalue_dx(piece, t_a)), std::fabs(piece_dvalue_dx(piece, t_b)));
  if (std::holds_alternative<QuadraticShape>(piece.shape) || t_b <= t_a) return best;
  // Wide pieces occur only near x = 0, where the derivative varies fastest.
  const int interior = (t_b - t_a) > 1e-3 ? 64 : 1;
  for (int i = 1; i <= interior; ++i) {
    const double t = t_a + (t_b - t_a) * i / (interior + 1);
    best = std::max(best, std::fabs(piece_dvalue_dx(piece, t)));
  }
  return best;
}

double bisect_root(const Piece& piece, double t_a, double t_b) {
  double va = piece_value(piece, t_a);
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = t_a + 0.5 * (t_b - t_a);
    if (mid <= t_a || mid >= t_b) break;
    const double vm = piece_value(piece, mid);
    if (vm == 0.0) return mid;
    if ((vm > 0.0) == (va > 0.0)) {
      t_a = mid;
      va = vm;
    } else {
      t_b = mid;
    }
  }
  return t_a + 0.5 * (t_b - t_a);
}

PrefixProfileSource::PrefixProfileSource(std::shared_ptr<const PrefixSums> sums, ProfileKind kind, u64 y_max)
    : sums_(std::move(sums)), kind_(kind), y_max_(y_max) {
  if (!sums_) throw PreconditionError("PrefixProfileSource: missing prefix sums");
  if (y_max_ < 1) throw RangeError("PrefixProfileSource: y_max must be >= 1");
  if (y_max_ > sums_->n_max()) {
    throw CapabilityError("profile y_max " + std::to_string(y_max_) + " exceeds the summatory cap " +
                              std::to_string(sums_->n_max()),
                          static_cast<double>(sums_->n_max()));
  }
}

double PrefixProfileSource::t_max() const { return std::log(static_cast<double>(y_max_)); }

Piece PrefixProfileSource::make_piece(u64 k, const PrefixPoint& p) const {
  Piece piece;
  piece.t_lo = std::log(static_cast<double>(k));
  piece.t_hi = k < y_max_ ? std::log(static_cast<double>(k + 1)) : piece.t_lo;
  if (kind_ == ProfileKind::smoothed) {
    piece.shape = ExpLinearShape{static_cast<double>(p.M), -p.A};
  } else {
    piece.shape = ExpLinearShape{0.0, static_cast<double>(p.M)};
  }
  return piece;
}

void PrefixProfileSource::stream(const std::function<void(const Piece&)>& sink) const {
  stream_steps(1, y_max_, sink);
}

void PrefixProfileSource::stream_steps(u64 k_lo, u64 k_hi, const std::function<void(const Piece&)>& sink) const {
  k_hi = std::min(k_hi, y_max_);
  if (k_lo > k_hi) return;
  sums_->for_each(k_lo, k_hi, [&](u64 k, const PrefixPoint& p) { sink(make_piece(k, p)); });
}

Piece PrefixProfileSource::piece_at(double t) const {
  if (t <= 0.0) return make_piece(1, sums_->at(1));
  double e = std::exp(t);
  if (e >= static_cast<double>(y_max_)) return make_piece(y_max_, sums_->at(y_max_));
  u64 k = std::max<u64>(1, static_cast<u64>(e));
  // Boundaries are log(k) as computed by make_piece; agree with them exactly.
  while (k < y_max_ && std::log(static_cast<double>(k + 1)) <= t) ++k;
  while (k > 1 && std::log(static_cast<double>(k)) > t) --k;
  return make_piece(k, sums_->at(k));
}

double PrefixProfileSource::t_of_x(double x) const { return std::sqrt(std::max(x, 0.0)); }
double PrefixProfileSource::x_of_t(double t) const { return t * t; }

VectorPieceSource::VectorPieceSource(std::vector<Piece> pieces, bool jumps)
    : pieces_(std::move(pieces)), jumps_(jumps) {
  if (pieces_.empty()) throw PreconditionError("VectorPieceSource: no pieces");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].t_hi < pieces_[i].t_lo) throw PreconditionError("VectorPieceSource: inverted piece");
    if (i > 0 && pieces_[i].t_lo != pieces_[i - 1].t_hi) {
      throw PreconditionError("VectorPieceSource: pieces must tile the range");
    }
    if (pieces_[i].shape.index() != pieces_[0].shape.index()) {
      throw PreconditionError("VectorPieceSource: pieces must share one family");
    }
  }
}

double VectorPieceSource::t_max() const { return pieces_.back().t_hi; }

void VectorPieceSource::stream(const std::function<void(const Piece&)>& sink) const {
  for (const Piece& p : pieces_) sink(p);
}

Piece VectorPieceSource::piece_at(double t) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const Piece& p) { return v < p.t_lo; });
  if (it == pieces_.begin()) return pieces_.front();
  return *std::prev(it);
}

double VectorPieceSource::t_of_x(double x) const { return piece_t(pieces_.front(), x); }
double VectorPieceSource::x_of_t(double t) const { return piece_x(pieces_.front(), t); }

}  // namespace mlab
