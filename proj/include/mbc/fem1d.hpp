#pragma once

#include "mbc/banded.hpp"
#include "mbc/piecewise_poly.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mbc {

/// Uniform mesh of (0,1) with nodes x_j = j h, j = 0..n.
class Mesh1D {
 public:
  explicit Mesh1D(std::size_t n_elements);
  /// Mesh with h = 1/n; rejects h that is not the reciprocal of an integer.
  static Mesh1D from_h(double h);

  std::size_t n_elements() const { return n_; }
  std::size_t node_count() const { return n_ + 1; }
  std::size_t interior_count() const { return n_ - 1; }
  double h() const { return h_; }
  double node(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(n_); }

  friend bool operator==(const Mesh1D&, const Mesh1D&) = default;

 private:
  std::size_t n_;
  double h_;
};

/// Continuous piecewise-linear function given by its values at all nodes.
struct NodalField {
  Mesh1D mesh;
  std::vector<double> values;

  explicit NodalField(const Mesh1D& m, double fill = 0.0) : mesh(m), values(m.node_count(), fill) {}
  NodalField(const Mesh1D& m, std::vector<double> v);

  static NodalField interpolate(const Mesh1D& m, const std::function<double(double)>& f);

  double operator()(double x) const;
  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t j) { return values[j]; }
  double operator[](std::size_t j) const { return values[j]; }
};

/// Dirichlet Laplacian on interior nodes, rows (1/h)(-1, 2, -1).
BandMatrix assemble_stiffness(const Mesh1D& mesh);
/// Interior mass matrix, rows (h/6)(1, 4, 1).
BandMatrix assemble_mass(const Mesh1D& mesh);

/// Interior entries of (f, phi_j), exact for piecewise polynomials of degree <= 8.
std::vector<double> load_vector(const Mesh1D& mesh, const PiecewisePolynomial& f);

/// Discrete solution operator K_h applied to an interior load vector.
NodalField solve_dirichlet(const Mesh1D& mesh, std::span<const double> rhs);

/// Exact integral of (u_h - ref)^2.
double l2_error_sq(const NodalField& u_h, const PiecewisePolynomial& ref);
/// Exact integral of |u_h - ref|.
double l1_error(const NodalField& u_h, const PiecewisePolynomial& ref);

/// (a, b) in L2 for P1 fields, including boundary nodes.
double mass_inner(const NodalField& a, const NodalField& b);
/// Trapezoidal (lumped mass) inner product.
double lumped_inner(const NodalField& a, const NodalField& b);

namespace quadrature {

struct Rule {
  std::span<const double> nodes;    // on [0,1]
  std::span<const double> weights;  // sum to 1
};

Rule gauss5();
Rule gauss6();

}  // namespace quadrature

}  // namespace mbc
