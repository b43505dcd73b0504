#pragma once

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "mlab/summatory.hpp"

namespace mlab {

/// H(x) = (p s + q) e^{-s} with s = sqrt(x).  The native coordinate is s.
/// The smoothed profile on y in [k, k+1) is p = M(k), q = -A(k); the Mertens
/// profile is p = 0, q = M(k).
struct ExpLinearShape {
  double p = 0;
  double q = 0;
};

/// H(x) = c0 + c1 x + c2 x^2.  The native coordinate is x itself.
struct QuadraticShape {
  double c0 = 0;
  double c1 = 0;
  double c2 = 0;
};

/// One closed-form piece on [t_lo, t_hi] in its native coordinate t.
/// Pieces of one source share a family, tile the range in order, and may
/// have zero width.
struct Piece {
  double t_lo = 0;
  double t_hi = 0;
  std::variant<ExpLinearShape, QuadraticShape> shape;
};

/// Below this x the profile derivative is evaluated at x_min.
inline constexpr double kXMin = 1e-6;

double piece_x(const Piece& piece, double t);
/// Native coordinate of an x position.
double piece_t(const Piece& piece, double x);
double piece_value(const Piece& piece, double t);
/// dH/dx at native t (x clamped to kXMin from below).
double piece_dvalue_dx(const Piece& piece, double t);
bool piece_is_zero(const Piece& piece);
/// |H(t)| is within rounding of zero relative to the size of its terms.
bool piece_value_negligible(const Piece& piece, double t);
/// Interior critical point of H in (t_a, t_b), if any.
bool piece_critical_point(const Piece& piece, double t_a, double t_b, double& t_crit);
/// int H dx over native [t_a, t_b].
double piece_integral(const Piece& piece, double t_a, double t_b);
/// int |H| dx over native [t_a, t_b], split at the roots of H.
double piece_abs_integral(const Piece& piece, double t_a, double t_b);
/// Sup of |H| over [t_a, t_b] and where it is attained.
double piece_max_abs(const Piece& piece, double t_a, double t_b, double* where = nullptr);
/// Sup of |dH/dx| over [t_a, t_b] on a grid dense enough for the piece width.
double piece_max_abs_derivative(const Piece& piece, double t_a, double t_b);
/// Root of H in the open interval (t_a, t_b) where H(t_a), H(t_b) differ in
/// sign, found by bisection to full double resolution.
double bisect_root(const Piece& piece, double t_a, double t_b);

/// A piecewise closed-form function of x >= 0, streamed in order.
class PieceSource {
 public:
  virtual ~PieceSource() = default;
  /// Native coordinate of the last piece's right end.
  virtual double t_max() const = 0;
  /// True when the function may jump between pieces (the Mertens profile).
  virtual bool has_jumps() const = 0;
  /// Streams every piece in order.
  virtual void stream(const std::function<void(const Piece&)>& sink) const = 0;
  /// The piece containing t (the right-hand piece at a shared boundary).
  virtual Piece piece_at(double t) const = 0;
  /// Maps an x position to the native coordinate.
  virtual double t_of_x(double x) const = 0;
  virtual double x_of_t(double t) const = 0;
};

enum class ProfileKind { smoothed, mertens };

/// Profile H(x) = F(e^{sqrt x}) / e^{sqrt x} (smoothed) or M(e^{sqrt x}) / e^{sqrt x}
/// (mertens) for 1 <= y <= y_max, streamed one integer step of y at a time.
class PrefixProfileSource final : public PieceSource {
 public:
  PrefixProfileSource(std::shared_ptr<const PrefixSums> sums, ProfileKind kind, u64 y_max);

  double t_max() const override;
  bool has_jumps() const override { return kind_ == ProfileKind::mertens; }
  void stream(const std::function<void(const Piece&)>& sink) const override;
  Piece piece_at(double t) const override;
  double t_of_x(double x) const override;
  double x_of_t(double t) const override;

  ProfileKind kind() const { return kind_; }
  u64 y_max() const { return y_max_; }
  /// Streams only the steps k in [k_lo, k_hi].
  void stream_steps(u64 k_lo, u64 k_hi, const std::function<void(const Piece&)>& sink) const;

 private:
  Piece make_piece(u64 k, const PrefixPoint& p) const;

  std::shared_ptr<const PrefixSums> sums_;
  ProfileKind kind_;
  u64 y_max_;
};

/// Explicit list of pieces; used for synthetic profiles.
class VectorPieceSource final : public PieceSource {
 public:
  explicit VectorPieceSource(std::vector<Piece> pieces, bool jumps = false);

  double t_max() const override;
  bool has_jumps() const override { return jumps_; }
  void stream(const std::function<void(const Piece&)>& sink) const override;
  Piece piece_at(double t) const override;
  double t_of_x(double x) const override;
  double x_of_t(double t) const override;

 private:
  std::vector<Piece> pieces_;
  bool jumps_;
};

}  // namespace mlab
