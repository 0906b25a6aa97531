#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

namespace mbc {

/// Exact rational scalar. GMP keeps every value in canonical form
/// (positive denominator, coprime numerator/denominator).
using Rational = mpq_class;

/// Parses "p/q" or "p" into a canonical rational.
Rational rational(std::string_view text);
Rational rational(long numerator, long denominator = 1);

/// Correctly rounded conversion whenever numerator and denominator are exact doubles.
double to_double(const Rational& r);

/// Piecewise polynomial on [0,1] with exact rational breakpoints and
/// coefficients. Piece j lives on [b_j, b_{j+1}); the last piece is closed.
///
/// Coefficients are stored in ascending powers of the global variable x.
/// For floating point evaluation each piece is additionally re-expanded
/// exactly around its left breakpoint, which keeps the large cancelling
/// coefficients of high-degree pieces out of the double arithmetic.
class PiecewisePolynomial {
 public:
  using Coefficients = std::vector<Rational>;

  /// Zero function.
  PiecewisePolynomial() : PiecewisePolynomial({Rational(0), Rational(1)}, {{Rational(0)}}) {}
  PiecewisePolynomial(std::vector<Rational> breakpoints, std::vector<Coefficients> pieces);

  static PiecewisePolynomial constant(const Rational& value);
  /// Single-piece polynomial on [0,1].
  static PiecewisePolynomial polynomial(Coefficients coefficients);

  const std::vector<Rational>& breakpoints() const { return breakpoints_; }
  const std::vector<Coefficients>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }
  double breakpoint(std::size_t j) const { return breakpoints_d_[j]; }
  int degree() const;
  int piece_degree(std::size_t j) const;

  /// Index of the piece whose half-open interval contains x.
  std::size_t locate(double x) const;

  double eval(double x) const;
  /// Evaluates the polynomial of piece j at any x (no interval check).
  double eval_piece(std::size_t j, double x) const;
  Rational eval_exact(const Rational& x) const;
  Rational eval_piece_exact(std::size_t j, const Rational& x) const;

  /// Same function on a finer breakpoint set (must contain the current one).
  PiecewisePolynomial refined(const std::vector<Rational>& breakpoints) const;

  friend PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b);
  friend PiecewisePolynomial operator-(const PiecewisePolynomial& a, const PiecewisePolynomial& b);
  friend PiecewisePolynomial operator*(const Rational& s, const PiecewisePolynomial& a);

  /// Exact equality of breakpoints and trimmed coefficients.
  friend bool operator==(const PiecewisePolynomial& a, const PiecewisePolynomial& b);

 private:
  std::vector<Rational> breakpoints_;
  std::vector<Coefficients> pieces_;
  std::vector<double> breakpoints_d_;
  std::vector<std::vector<double>> local_;  // ascending powers of (x - b_j)
};

PiecewisePolynomial differentiate(const PiecewisePolynomial& pp);
PiecewisePolynomial antiderivative(const PiecewisePolynomial& pp, const Rational& value_at_zero);

double integrate(const PiecewisePolynomial& pp, double a, double b);
Rational integrate_exact(const PiecewisePolynomial& pp, const Rational& a, const Rational& b);

struct LevelPoint {
  double x;
  /// True when x bounds a piece on which pp is identically c.
  bool interval_bound = false;
};

inline constexpr std::size_t kDefaultLevelSamples = 1024;

/// All solutions of pp(x) = c in [0,1], ascending. Sign changes on a
/// per-piece sampling grid are refined by bisection down to machine
/// precision; sampled values within tol(1+|c|) of c and near-tangencies
/// (critical points whose value is within the same bound) are included too.
std::vector<LevelPoint> level_set_points(const PiecewisePolynomial& pp, double c, double tol,
                                         std::size_t samples_per_piece = kDefaultLevelSamples);

namespace detail {

/// Roots of a continuous f on [a,b]: sign changes on a uniform sample grid
/// refined by bisection. Grid values that are exactly zero are roots.
std::vector<double> bracket_roots(const std::function<double(double)>& f, double a, double b,
                                  std::size_t samples);

}  // namespace detail

}  // namespace mbc
