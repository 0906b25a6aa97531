#include "mbc/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

extern "C" {
void dgbtrf_(const int* m, const int* n, const int* kl, const int* ku, double* ab, const int* ldab, int* ipiv,
             int* info);
void dgbtrs_(const char* trans, const int* n, const int* kl, const int* ku, const int* nrhs, const double* ab,
             const int* ldab, const int* ipiv, double* b, const int* ldb, int* info, std::size_t trans_len);
}

namespace mbc {

BandMatrix::BandMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(ldab_ * n, 0.0) {
  if (n == 0) throw std::invalid_argument("BandMatrix: empty");
}

bool BandMatrix::in_band(std::size_t i, std::size_t j) const {
  return i < n_ && j < n_ && i <= j + kl_ && j <= i + ku_;
}

double BandMatrix::at(std::size_t i, std::size_t j) const { return in_band(i, j) ? ab_[index(i, j)] : 0.0; }

void BandMatrix::set(std::size_t i, std::size_t j, double v) {
  if (!in_band(i, j)) throw std::out_of_range("BandMatrix: entry outside band");
  ab_[index(i, j)] = v;
}

void BandMatrix::add(std::size_t i, std::size_t j, double v) {
  if (!in_band(i, j)) throw std::out_of_range("BandMatrix: entry outside band");
  ab_[index(i, j)] += v;
}

std::vector<double> BandMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw std::invalid_argument("BandMatrix::multiply: size mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t lo = j > ku_ ? j - ku_ : 0;
    const std::size_t hi = std::min(n_ - 1, j + kl_);
    for (std::size_t i = lo; i <= hi; ++i) y[i] += ab_[index(i, j)] * x[j];
  }
  return y;
}

std::vector<double> BandMatrix::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw std::invalid_argument("BandMatrix::solve: size mismatch");
  auto lu = ab_;
  std::vector<int> ipiv(n_);
  const int n = static_cast<int>(n_), kl = static_cast<int>(kl_), ku = static_cast<int>(ku_);
  const int ldab = static_cast<int>(ldab_), nrhs = 1;
  int info = 0;
  dgbtrf_(&n, &n, &kl, &ku, lu.data(), &ldab, ipiv.data(), &info);
  if (info > 0) throw std::runtime_error("BandMatrix::solve: singular pivot at row " + std::to_string(info));
  if (info < 0) throw std::logic_error("BandMatrix::solve: invalid argument " + std::to_string(-info));

  const auto substitute = [&](std::vector<double>& b) {
    int sinfo = 0;
    dgbtrs_("N", &n, &kl, &ku, &nrhs, lu.data(), &ldab, ipiv.data(), b.data(), &n, &sinfo, 1);
    if (sinfo != 0) throw std::logic_error("BandMatrix::solve: dgbtrs failed");
  };
  std::vector<double> x(rhs.begin(), rhs.end());
  substitute(x);

  // Iterative refinement with residuals accumulated in extended precision.
  // Discretized second-order operators lose about log10(h^-2) digits in a
  // plain solve; a few sweeps recover them.
  std::vector<double> r(n_);
  double prev = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i > kl_ ? i - kl_ : 0;
      const std::size_t hi = std::min(n_ - 1, i + ku_);
      long double acc = rhs[i];
      for (std::size_t j = lo; j <= hi; ++j) acc -= static_cast<long double>(ab_[index(i, j)]) * x[j];
      r[i] = static_cast<double>(acc);
    }
    substitute(r);
    double dx = 0.0, xn = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      x[i] += r[i];
      dx = std::max(dx, std::abs(r[i]));
      xn = std::max(xn, std::abs(x[i]));
    }
    if (dx <= 1e-15 * xn || dx >= 0.5 * prev) break;
    prev = dx;
  }
  return x;
}

}  // namespace mbc
