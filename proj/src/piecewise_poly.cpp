#include "mbc/piecewise_poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mbc {

namespace {

void trim(PiecewisePolynomial::Coefficients& c) {
  while (c.size() > 1 && c.back() == 0) c.pop_back();
  if (c.empty()) c.emplace_back(0);
}

Rational horner(const PiecewisePolynomial::Coefficients& c, const Rational& x) {
  Rational acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

// Taylor shift: coefficients of p(a + t) in ascending powers of t.
std::vector<double> shifted(const PiecewisePolynomial::Coefficients& c, const Rational& a) {
  PiecewisePolynomial::Coefficients work = c;
  const std::size_t n = work.size();
  // Repeated synthetic division by (x - a).
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = n - 1; k > m; --k) work[k - 1] += a * work[k];
  }
  std::vector<double> out(n);
  for (std::size_t m = 0; m < n; ++m) out[m] = to_double(work[m]);
  return out;
}

PiecewisePolynomial::Coefficients add(const PiecewisePolynomial::Coefficients& a,
                                      const PiecewisePolynomial::Coefficients& b, int sign) {
  PiecewisePolynomial::Coefficients out(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] += sign * b[k];
  trim(out);
  return out;
}

std::vector<Rational> merged_breakpoints(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  std::vector<Rational> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PiecewisePolynomial combine(const PiecewisePolynomial& a, const PiecewisePolynomial& b, int sign) {
  const auto bps = merged_breakpoints(a.breakpoints(), b.breakpoints());
  const auto ra = a.refined(bps);
  const auto rb = b.refined(bps);
  std::vector<PiecewisePolynomial::Coefficients> pieces;
  pieces.reserve(bps.size() - 1);
  for (std::size_t j = 0; j + 1 < bps.size(); ++j) pieces.push_back(add(ra.pieces()[j], rb.pieces()[j], sign));
  return {bps, std::move(pieces)};
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double flo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Rational rational(std::string_view text) {
  Rational r(std::string(text), 10);
  r.canonicalize();
  return r;
}

double to_double(const Rational& r) {
  const mpz_class& num = r.get_num();
  const mpz_class& den = r.get_den();
  if (mpz_sizeinbase(num.get_mpz_t(), 2) <= 53 && mpz_sizeinbase(den.get_mpz_t(), 2) <= 53)
    return num.get_d() / den.get_d();
  return r.get_d();
}

Rational rational(long numerator, long denominator) {
  if (denominator == 0) throw std::invalid_argument("rational: zero denominator");
  Rational r(numerator, denominator);
  r.canonicalize();
  return r;
}

PiecewisePolynomial::PiecewisePolynomial(std::vector<Rational> breakpoints, std::vector<Coefficients> pieces)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  if (breakpoints_.size() < 2 || breakpoints_.front() != 0 || breakpoints_.back() != 1)
    throw std::invalid_argument("PiecewisePolynomial: breakpoints must span [0,1]");
  for (std::size_t j = 0; j + 1 < breakpoints_.size(); ++j)
    if (!(breakpoints_[j] < breakpoints_[j + 1]))
      throw std::invalid_argument("PiecewisePolynomial: breakpoints must be strictly increasing");
  if (pieces_.size() != breakpoints_.size() - 1)
    throw std::invalid_argument("PiecewisePolynomial: need one coefficient list per interval");
  for (auto& c : pieces_) {
    if (c.empty()) throw std::invalid_argument("PiecewisePolynomial: empty coefficient list");
    for (auto& v : c) v.canonicalize();
    trim(c);
  }
  breakpoints_d_.reserve(breakpoints_.size());
  for (const auto& b : breakpoints_) breakpoints_d_.push_back(to_double(b));
  local_.reserve(pieces_.size());
  for (std::size_t j = 0; j < pieces_.size(); ++j) local_.push_back(shifted(pieces_[j], breakpoints_[j]));
}

PiecewisePolynomial PiecewisePolynomial::constant(const Rational& value) {
  return {{Rational(0), Rational(1)}, {{value}}};
}

PiecewisePolynomial PiecewisePolynomial::polynomial(Coefficients coefficients) {
  return {{Rational(0), Rational(1)}, {std::move(coefficients)}};
}

int PiecewisePolynomial::piece_degree(std::size_t j) const { return static_cast<int>(pieces_[j].size()) - 1; }

int PiecewisePolynomial::degree() const {
  int d = 0;
  for (std::size_t j = 0; j < pieces_.size(); ++j) d = std::max(d, piece_degree(j));
  return d;
}

std::size_t PiecewisePolynomial::locate(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("PiecewisePolynomial: x outside [0,1]");
  const auto it = std::upper_bound(breakpoints_d_.begin(), breakpoints_d_.end(), x);
  const auto j = static_cast<std::size_t>(it - breakpoints_d_.begin());
  return std::min(j == 0 ? 0 : j - 1, pieces_.size() - 1);
}

double PiecewisePolynomial::eval_piece(std::size_t j, double x) const {
  const auto& c = local_[j];
  const double t = x - breakpoints_d_[j];
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double PiecewisePolynomial::eval(double x) const { return eval_piece(locate(x), x); }

Rational PiecewisePolynomial::eval_piece_exact(std::size_t j, const Rational& x) const {
  return horner(pieces_[j], x);
}

Rational PiecewisePolynomial::eval_exact(const Rational& x) const {
  if (x < 0 || x > 1) throw std::domain_error("PiecewisePolynomial: x outside [0,1]");
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  auto j = static_cast<std::size_t>(it - breakpoints_.begin());
  j = std::min(j == 0 ? 0 : j - 1, pieces_.size() - 1);
  return horner(pieces_[j], x);
}

PiecewisePolynomial PiecewisePolynomial::refined(const std::vector<Rational>& breakpoints) const {
  std::vector<Coefficients> pieces;
  pieces.reserve(breakpoints.size() - 1);
  std::size_t src = 0;
  for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) {
    while (src + 1 < pieces_.size() && breakpoints_[src + 1] <= breakpoints[j]) ++src;
    if (breakpoints[j + 1] > breakpoints_[src + 1])
      throw std::invalid_argument("PiecewisePolynomial::refined: not a refinement");
    pieces.push_back(pieces_[src]);
  }
  return {breakpoints, std::move(pieces)};
}

PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b) { return combine(a, b, 1); }
PiecewisePolynomial operator-(const PiecewisePolynomial& a, const PiecewisePolynomial& b) { return combine(a, b, -1); }

PiecewisePolynomial operator*(const Rational& s, const PiecewisePolynomial& a) {
  auto pieces = a.pieces_;
  for (auto& c : pieces)
    for (auto& v : c) v *= s;
  return {a.breakpoints_, std::move(pieces)};
}

bool operator==(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
  return a.breakpoints_ == b.breakpoints_ && a.pieces_ == b.pieces_;
}

PiecewisePolynomial differentiate(const PiecewisePolynomial& pp) {
  std::vector<PiecewisePolynomial::Coefficients> pieces;
  pieces.reserve(pp.piece_count());
  for (const auto& c : pp.pieces()) {
    PiecewisePolynomial::Coefficients d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<long>(k));
    if (d.empty()) d.emplace_back(0);
    pieces.push_back(std::move(d));
  }
  return {pp.breakpoints(), std::move(pieces)};
}

PiecewisePolynomial antiderivative(const PiecewisePolynomial& pp, const Rational& value_at_zero) {
  const auto& bps = pp.breakpoints();
  std::vector<PiecewisePolynomial::Coefficients> pieces;
  pieces.reserve(pp.piece_count());
  Rational carry = value_at_zero;  // F(b_j) from the left
  for (std::size_t j = 0; j < pp.piece_count(); ++j) {
    const auto& c = pp.pieces()[j];
    PiecewisePolynomial::Coefficients f(c.size() + 1, Rational(0));
    for (std::size_t k = 0; k < c.size(); ++k) f[k + 1] = c[k] / static_cast<long>(k + 1);
    f[0] = carry - horner(f, bps[j]);
    carry = horner(f, bps[j + 1]);
    pieces.push_back(std::move(f));
  }
  return {bps, std::move(pieces)};
}

Rational integrate_exact(const PiecewisePolynomial& pp, const Rational& a, const Rational& b) {
  if (a > b) throw std::invalid_argument("integrate: a > b");
  const auto F = antiderivative(pp, 0);
  return F.eval_exact(b) - F.eval_exact(a);
}

double integrate(const PiecewisePolynomial& pp, double a, double b) {
  if (a > b) throw std::invalid_argument("integrate: a > b");
  if (a < 0.0 || b > 1.0) throw std::domain_error("integrate: bounds outside [0,1]");
  const auto F = antiderivative(pp, 0);
  return F.eval(b) - F.eval(a);
}

namespace detail {

std::vector<double> bracket_roots(const std::function<double(double)>& f, double a, double b, std::size_t samples) {
  std::vector<double> roots;
  if (!(b > a)) return roots;
  samples = std::max<std::size_t>(samples, 1);
  const auto at = [&](std::size_t k) { return k == samples ? b : a + (b - a) * static_cast<double>(k) / static_cast<double>(samples); };
  double x0 = a;
  double f0 = f(a);
  if (f0 == 0.0) roots.push_back(a);
  for (std::size_t k = 1; k <= samples; ++k) {
    const double x1 = at(k);
    const double f1 = f(x1);
    if (f1 == 0.0) {
      roots.push_back(x1);
    } else if (f0 != 0.0 && (f0 < 0) != (f1 < 0)) {
      roots.push_back(bisect(f, x0, x1, f0));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

}  // namespace detail

std::vector<LevelPoint> level_set_points(const PiecewisePolynomial& pp, double c, double tol,
                                         std::size_t samples_per_piece) {
  if (!(tol > 0.0)) throw std::invalid_argument("level_set_points: tol must be positive");
  const double bound = tol * (1.0 + std::abs(c));
  const auto dpp = differentiate(pp);
  std::vector<LevelPoint> found;
  for (std::size_t j = 0; j < pp.piece_count(); ++j) {
    const double a = pp.breakpoint(j);
    const double b = pp.breakpoint(j + 1);
    if (pp.piece_degree(j) == 0) {
      if (std::abs(to_double(pp.pieces()[j][0]) - c) <= bound) {
        found.push_back({a, true});
        found.push_back({b, true});
      }
      continue;
    }
    const auto f = [&](double x) { return pp.eval_piece(j, x) - c; };
    for (double x : detail::bracket_roots(f, a, b, samples_per_piece)) found.push_back({x, false});

    // Sampled values that already satisfy the tolerance.
    for (std::size_t k = 0; k <= samples_per_piece; ++k) {
      const double x = k == samples_per_piece ? b : a + (b - a) * static_cast<double>(k) / static_cast<double>(samples_per_piece);
      if (std::abs(f(x)) <= bound) found.push_back({x, false});
    }
    // Touching points without a sign change.
    const auto df = [&](double x) { return dpp.eval_piece(j, x); };
    for (double x : detail::bracket_roots(df, a, b, samples_per_piece))
      if (std::abs(f(x)) <= bound) found.push_back({x, false});
  }
  std::sort(found.begin(), found.end(), [](const LevelPoint& l, const LevelPoint& r) { return l.x < r.x; });
  std::vector<LevelPoint> out;
  for (const auto& p : found) {
    if (!out.empty() && p.x - out.back().x <= 1e-13) {
      out.back().interval_bound = out.back().interval_bound || p.interval_bound;
      continue;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace mbc
