#pragma once

#include "mbc/penalty.hpp"
#include "mbc/piecewise_poly.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace mbc {

/// Benchmark with known solution of the unregularized problem: optimal
/// adjoint p_bar, optimal multibang control u_bar, optimal state w = K u_bar
/// and the target z = w - p_bar'' for which (u_bar, p_bar) is optimal.
struct ExampleProblem {
  int id = 0;
  MultibangConfig cfg;  // gamma left at 0
  PiecewisePolynomial p_bar;
  PiecewisePolynomial u_bar;
  PiecewisePolynomial w;
  PiecewisePolynomial z;
  std::optional<double> kappa_expected;
};

/// Levels (-2,-1,0,1,2), alpha = 2. Example 1 satisfies the gradient
/// condition on the level sets of p_bar; example 2 has p_bar' = 0 where
/// p_bar touches a threshold (x = 2/9 and mirror points).
ExampleProblem build_example(int id);

/// w with -w'' = f on (0,1), w(0) = w(1) = 0, in exact arithmetic.
PiecewisePolynomial exact_poisson_solve_pwpoly(const PiecewisePolynomial& f);

struct ConsistencyReport {
  /// max |K(z - K u_bar) - p_bar| on the grid.
  double max_deviation = 0.0;
  std::size_t grid_points = 0;
  /// Grid points where p_bar lies in a regular region Q_i but u_bar != u_i.
  std::size_t classification_violations = 0;
  /// Largest distance of a violating p_bar value from the nearest threshold.
  double max_violation_depth = 0.0;
};

ConsistencyReport consistency_check(const ExampleProblem& ex, std::size_t grid = 10000);

/// meas of the union over thresholds t_i of {x : |p(x) - t_i| < eps}.
double reg_measure(const PiecewisePolynomial& p_bar, const MultibangConfig& cfg, double epsilon);

struct RegEstimate {
  std::vector<double> epsilons;
  std::vector<double> measures;
  double kappa_fit = 0.0;
  double c_fit = 0.0;
};

/// 16 geometric points from 1e-6 to 1e-2.
std::vector<double> default_epsilon_grid();
std::vector<double> geometric_grid(double lo, double hi, std::size_t points);

/// Least-squares fit of log(measure) = log(c) + kappa log(eps).
RegEstimate fit_reg_kappa(const PiecewisePolynomial& p_bar, const MultibangConfig& cfg,
                          const std::vector<double>& epsilon_grid);

struct LevelGradient {
  double min_gradient = std::numeric_limits<double>::infinity();
  double location = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
};

/// min |p_bar'| over all points where p_bar meets a threshold; +inf if none.
LevelGradient min_gradient_on_levelsets(const PiecewisePolynomial& p_bar, const MultibangConfig& cfg);

}  // namespace mbc
