#pragma once

#include "mbc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mbc::testing {

inline MultibangConfig five_levels(double gamma) { return {{-2, -1, 0, 1, 2}, 2.0, gamma}; }

/// Piecewise cubic on 1-4 pieces with rational breakpoints and coefficients.
inline PiecewisePolynomial random_target(std::mt19937& rng, long scale = 200) {
  std::uniform_int_distribution<int> pieces(1, 4), den(2, 9), deg(0, 3);
  std::uniform_int_distribution<long> coef(-scale, scale);
  std::vector<Rational> bps{Rational(0)};
  const int m = pieces(rng);
  for (int j = 1; j < m; ++j) bps.push_back(Rational(j, m) + Rational(1, 10 * den(rng) * m));
  bps.push_back(Rational(1));
  std::vector<PiecewisePolynomial::Coefficients> cs;
  for (int j = 0; j < m; ++j) {
    PiecewisePolynomial::Coefficients c;
    for (int k = 0, d = deg(rng); k <= d; ++k) c.push_back(rational(coef(rng), den(rng)));
    cs.push_back(c);
  }
  return {bps, cs};
}

struct RandomCase {
  ProblemInstance problem;
  SolverState state;
};

/// Random problem with n in [16, 512], gamma log-uniform in [1e-4, 1] and a
/// random iterate whose adjoint visits every region.
inline RandomCase random_case(std::mt19937& rng) {
  std::uniform_int_distribution<std::size_t> n_dist(16, 512);
  std::uniform_real_distribution<double> log_gamma(std::log(1e-4), 0.0), unit(-1.0, 1.0);
  const Mesh1D mesh(n_dist(rng));
  const double gamma = std::exp(log_gamma(rng));
  ProblemInstance problem(mesh, five_levels(gamma), random_target(rng));
  SolverState state(mesh);
  const double amp = 4.0 + 2.0 * std::abs(unit(rng));
  const double freq = 1.0 + 6.0 * std::abs(unit(rng));
  for (std::size_t j = 1; j + 1 < mesh.node_count(); ++j) {
    const double x = mesh.node(j);
    state.p[j] = amp * std::sin(freq * 3.14159 * x) + 0.3 * unit(rng);
    state.u[j] = std::clamp(2.0 * unit(rng), -2.0, 2.0);
    state.y[j] = unit(rng);
  }
  state.partition = classify_field(problem.cfg, state.p);
  return {std::move(problem), std::move(state)};
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// max_j |a_j - b_j| / max(1, max |a|).
inline double rel_diff(const NodalField& a, const NodalField& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d / std::max(1.0, max_abs(a.values));
}

}  // namespace mbc::testing
