#include "mbc/fem1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mbc {

namespace quadrature {

namespace {
// Gauss-Legendre rules mapped to [0,1].
constexpr std::array<double, 5> kG5Nodes = {
    0.5 * (1.0 - 0.9061798459386640), 0.5 * (1.0 - 0.5384693101056831), 0.5,
    0.5 * (1.0 + 0.5384693101056831), 0.5 * (1.0 + 0.9061798459386640)};
constexpr std::array<double, 5> kG5Weights = {
    0.5 * 0.2369268850561891, 0.5 * 0.4786286704993665, 0.5 * 0.5688888888888889,
    0.5 * 0.4786286704993665, 0.5 * 0.2369268850561891};
constexpr std::array<double, 6> kG6Nodes = {
    0.5 * (1.0 - 0.9324695142031521), 0.5 * (1.0 - 0.6612093864662645), 0.5 * (1.0 - 0.2386191860831969),
    0.5 * (1.0 + 0.2386191860831969), 0.5 * (1.0 + 0.6612093864662645), 0.5 * (1.0 + 0.9324695142031521)};
constexpr std::array<double, 6> kG6Weights = {
    0.5 * 0.1713244923791704, 0.5 * 0.3607615730481386, 0.5 * 0.4679139345726910,
    0.5 * 0.4679139345726910, 0.5 * 0.3607615730481386, 0.5 * 0.1713244923791704};
}  // namespace

Rule gauss5() { return {kG5Nodes, kG5Weights}; }
Rule gauss6() { return {kG6Nodes, kG6Weights}; }

}  // namespace quadrature

namespace {

template <class F>
double integrate_rule(const quadrature::Rule& rule, double a, double b, F&& f) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) s += rule.weights[q] * f(a + (b - a) * rule.nodes[q]);
  return (b - a) * s;
}

// Calls fn(element, piece, a, b) for every maximal sub-segment [a,b] of an
// element on which ref is a single polynomial piece.
template <class Fn>
void for_each_subsegment(const Mesh1D& mesh, const PiecewisePolynomial& ref, Fn&& fn) {
  std::size_t k = 0;
  const std::size_t last = ref.piece_count() - 1;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    const double x0 = mesh.node(e);
    const double x1 = mesh.node(e + 1);
    while (k < last && ref.breakpoint(k + 1) <= x0) ++k;
    double a = x0;
    while (a < x1) {
      const double b = k < last ? std::min(x1, ref.breakpoint(k + 1)) : x1;
      if (b > a) fn(e, k, a, b);
      if (b < x1) ++k;
      a = b;
    }
  }
}

double linear(const NodalField& u, std::size_t e, double x) {
  const double h = u.mesh.h();
  const double t = (x - u.mesh.node(e)) / h;
  return (1.0 - t) * u.values[e] + t * u.values[e + 1];
}

}  // namespace

Mesh1D::Mesh1D(std::size_t n_elements) : n_(n_elements), h_(1.0 / static_cast<double>(n_elements)) {
  if (n_elements < 2) throw std::invalid_argument("Mesh1D: need at least 2 elements");
}

Mesh1D Mesh1D::from_h(double h) {
  if (!(h > 0.0) || h > 0.5) throw std::invalid_argument("Mesh1D: h must lie in (0, 1/2]");
  const double n = std::round(1.0 / h);
  if (std::abs(n * h - 1.0) > 1e-9) throw std::invalid_argument("Mesh1D: h must be 1/n for an integer n");
  return Mesh1D(static_cast<std::size_t>(n));
}

NodalField::NodalField(const Mesh1D& m, std::vector<double> v) : mesh(m), values(std::move(v)) {
  if (values.size() != mesh.node_count()) throw std::invalid_argument("NodalField: value count mismatch");
}

NodalField NodalField::interpolate(const Mesh1D& m, const std::function<double(double)>& f) {
  NodalField out(m);
  for (std::size_t j = 0; j < m.node_count(); ++j) out.values[j] = f(m.node(j));
  return out;
}

double NodalField::operator()(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("NodalField: x outside [0,1]");
  auto e = static_cast<std::size_t>(x * static_cast<double>(mesh.n_elements()));
  e = std::min(e, mesh.n_elements() - 1);
  return linear(*this, e, x);
}

BandMatrix assemble_stiffness(const Mesh1D& mesh) {
  const std::size_t m = mesh.interior_count();
  BandMatrix a(m, 1, 1);
  const double inv_h = 1.0 / mesh.h();
  for (std::size_t i = 0; i < m; ++i) {
    a.set(i, i, 2.0 * inv_h);
    if (i > 0) a.set(i, i - 1, -inv_h);
    if (i + 1 < m) a.set(i, i + 1, -inv_h);
  }
  return a;
}

BandMatrix assemble_mass(const Mesh1D& mesh) {
  const std::size_t m = mesh.interior_count();
  BandMatrix a(m, 1, 1);
  const double s = mesh.h() / 6.0;
  for (std::size_t i = 0; i < m; ++i) {
    a.set(i, i, 4.0 * s);
    if (i > 0) a.set(i, i - 1, s);
    if (i + 1 < m) a.set(i, i + 1, s);
  }
  return a;
}

std::vector<double> load_vector(const Mesh1D& mesh, const PiecewisePolynomial& f) {
  std::vector<double> full(mesh.node_count(), 0.0);
  const auto rule = quadrature::gauss5();
  const double h = mesh.h();
  for_each_subsegment(mesh, f, [&](std::size_t e, std::size_t k, double a, double b) {
    const double x0 = mesh.node(e);
    full[e] += integrate_rule(rule, a, b, [&](double x) { return f.eval_piece(k, x) * (1.0 - (x - x0) / h); });
    full[e + 1] += integrate_rule(rule, a, b, [&](double x) { return f.eval_piece(k, x) * (x - x0) / h; });
  });
  return {full.begin() + 1, full.end() - 1};
}

NodalField solve_dirichlet(const Mesh1D& mesh, std::span<const double> rhs) {
  if (rhs.size() != mesh.interior_count())
    throw std::invalid_argument("solve_dirichlet: rhs length must equal the interior node count");
  const auto interior = assemble_stiffness(mesh).solve(rhs);
  NodalField y(mesh);
  std::copy(interior.begin(), interior.end(), y.values.begin() + 1);
  return y;
}

double l2_error_sq(const NodalField& u_h, const PiecewisePolynomial& ref) {
  const auto rule = quadrature::gauss6();
  double s = 0.0;
  for_each_subsegment(u_h.mesh, ref, [&](std::size_t e, std::size_t k, double a, double b) {
    s += integrate_rule(rule, a, b, [&](double x) {
      const double d = linear(u_h, e, x) - ref.eval_piece(k, x);
      return d * d;
    });
  });
  return s;
}

double l1_error(const NodalField& u_h, const PiecewisePolynomial& ref) {
  const auto rule = quadrature::gauss6();
  double s = 0.0;
  std::vector<double> cuts;
  for_each_subsegment(u_h.mesh, ref, [&](std::size_t e, std::size_t k, double a, double b) {
    const auto diff = [&](double x) { return linear(u_h, e, x) - ref.eval_piece(k, x); };
    cuts.clear();
    cuts.push_back(a);
    if (ref.piece_degree(k) <= 1) {
      const double da = diff(a), db = diff(b);
      if ((da < 0 && db > 0) || (da > 0 && db < 0)) cuts.push_back(a + (b - a) * da / (da - db));
    } else {
      for (double r : detail::bracket_roots(diff, a, b, 16))
        if (r > cuts.back() && r < b) cuts.push_back(r);
    }
    cuts.push_back(b);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double v = integrate_rule(rule, cuts[i], cuts[i + 1], diff);
      s += std::abs(v);
    }
  });
  return s;
}

double mass_inner(const NodalField& a, const NodalField& b) {
  if (!(a.mesh == b.mesh)) throw std::invalid_argument("mass_inner: mesh mismatch");
  const double s = a.mesh.h() / 6.0;
  double acc = 0.0;
  for (std::size_t e = 0; e < a.mesh.n_elements(); ++e) {
    const double a0 = a.values[e], a1 = a.values[e + 1], b0 = b.values[e], b1 = b.values[e + 1];
    acc += s * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1);
  }
  return acc;
}

double lumped_inner(const NodalField& a, const NodalField& b) {
  if (!(a.mesh == b.mesh)) throw std::invalid_argument("lumped_inner: mesh mismatch");
  const std::size_t n = a.mesh.n_elements();
  double acc = 0.5 * (a.values[0] * b.values[0] + a.values[n] * b.values[n]);
  for (std::size_t j = 1; j < n; ++j) acc += a.values[j] * b.values[j];
  return a.mesh.h() * acc;
}

}  // namespace mbc
