#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mbc {

/// Square band matrix with kl sub- and ku super-diagonals, stored in the
/// LAPACK general-band layout (with kl extra rows reserved for fill-in
/// from partial pivoting).
class BandMatrix {
 public:
  BandMatrix(std::size_t n, std::size_t kl, std::size_t ku);

  std::size_t size() const { return n_; }
  std::size_t lower() const { return kl_; }
  std::size_t upper() const { return ku_; }

  /// Entry (i,j); zero outside the band.
  double at(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double v);
  void add(std::size_t i, std::size_t j, double v);
  bool in_band(std::size_t i, std::size_t j) const;

  std::vector<double> multiply(std::span<const double> x) const;

  /// Solves A x = rhs by banded LU with partial pivoting followed by a few
  /// steps of iterative refinement. The matrix itself
  /// is not modified. Throws std::runtime_error on a singular factorization.
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const { return j * ldab_ + (kl_ + ku_ + i - j); }

  std::size_t n_, kl_, ku_, ldab_;
  std::vector<double> ab_;  // column-major, ldab_ x n_
};

/// A band matrix together with its right-hand side.
struct BandedSystem {
  BandMatrix matrix;
  std::vector<double> rhs;

  std::vector<double> solve() const { return matrix.solve(rhs); }
};

}  // namespace mbc
