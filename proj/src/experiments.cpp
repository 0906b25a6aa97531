#include "mbc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace mbc {

namespace {

using Coefficients = PiecewisePolynomial::Coefficients;

Coefficients coeffs(std::initializer_list<const char*> ascending) {
  Coefficients out;
  for (const char* c : ascending) out.push_back(rational(c));
  return out;
}

std::vector<Rational> knots(std::initializer_list<const char*> values) {
  std::vector<Rational> out;
  for (const char* v : values) out.push_back(rational(v));
  return out;
}

PiecewisePolynomial adjoint_example1() {
  return {knots({"0", "2/9", "3/9", "6/9", "7/9", "1"}),
          {coeffs({"0", "27/2"}),
           coeffs({"-72", "3123/2", "-13122", "54675", "-111537", "177147/2"}),
           coeffs({"9", "-18"}),
           coeffs({"-20079", "136062", "-367416", "494262", "-662661/2", "177147/2"}),
           coeffs({"-27/2", "27/2"})}};
}

PiecewisePolynomial adjoint_example2() {
  return {knots({"0", "3/27", "2/9", "5/18", "3/9", "4/9", "5/9", "6/9", "13/18", "7/9", "8/9", "1"}),
          {coeffs({"0", "27/2"}),
           coeffs({"-1703/81", "6812/9", "-20437/2", "135765/2", "-433593/2", "266085"}),
           coeffs({"-860051/81", "1943450/9", "-3498235/2", "7054821", "-14168034", "11334492"}),
           coeffs({"528697/18", "-1457650/3", "6413635/2", "-10553301", "17316666", "-11334492"}),
           coeffs({"27761/9", "-121150/3", "210182", "-1085913/2", "696195", "-709317/2"}),
           coeffs({"9", "-18"}),
           coeffs({"256331/9", "-710804/3", "1573075/2", "-2604285/2", "2149821/2", "-707859/2"}),
           coeffs({"16396175/9", "-39434798/3", "75835981/2", "-54660123", "39376206", "-11340324"}),
           coeffs({"-433967467/162", "161022862/9", "-95552197/2", "63759915", "-42526134", "11340324"}),
           coeffs({"-17395339/162", "11616563/18", "-1549124", "3712707/2", "-2221101/2", "265356"}),
           coeffs({"-27/2", "27/2"})}};
}

// Shared by both examples.
PiecewisePolynomial optimal_control() {
  return {knots({"0", "2/27", "2/9", "3/9", "4/9", "5/9", "6/9", "7/9", "25/27", "1"}),
          {coeffs({"0"}), coeffs({"1"}), coeffs({"2"}), coeffs({"1"}), coeffs({"0"}), coeffs({"-1"}),
           coeffs({"-2"}), coeffs({"-1"}), coeffs({"0"})}};
}

bool is_zero(const PiecewisePolynomial& pp) {
  for (const auto& c : pp.pieces())
    if (c.size() != 1 || c[0] != 0) return false;
  return true;
}

}  // namespace

PiecewisePolynomial exact_poisson_solve_pwpoly(const PiecewisePolynomial& f) {
  const auto twice = antiderivative(antiderivative(f, 0), 0);
  // w = -F2 + F2(1) x
  const Rational slope = twice.eval_exact(1);
  return PiecewisePolynomial::polynomial({Rational(0), slope}) - twice;
}

ExampleProblem build_example(int id) {
  ExampleProblem ex;
  ex.id = id;
  ex.cfg.levels = {-2.0, -1.0, 0.0, 1.0, 2.0};
  ex.cfg.alpha = 2.0;
  ex.cfg.gamma = 0.0;
  switch (id) {
    case 1:
      ex.p_bar = adjoint_example1();
      ex.kappa_expected = 1.0;
      break;
    case 2:
      ex.p_bar = adjoint_example2();
      break;
    default:
      throw std::invalid_argument("build_example: unknown example id " + std::to_string(id));
  }
  ex.u_bar = optimal_control();
  ex.w = exact_poisson_solve_pwpoly(ex.u_bar);
  const auto p_dd = differentiate(differentiate(ex.p_bar));
  ex.z = ex.w - p_dd;

  if (ex.p_bar.eval_exact(0) != 0 || ex.p_bar.eval_exact(1) != 0)
    throw std::logic_error("build_example: p_bar violates the boundary conditions");
  for (const auto& c : ex.u_bar.pieces())
    if (c.size() != 1 || std::find(ex.cfg.levels.begin(), ex.cfg.levels.end(), to_double(c[0])) == ex.cfg.levels.end())
      throw std::logic_error("build_example: u_bar is not level valued");
  if (!is_zero(ex.z - ex.w + p_dd)) throw std::logic_error("build_example: z != w - p_bar''");
  return ex;
}

ConsistencyReport consistency_check(const ExampleProblem& ex, std::size_t grid) {
  ConsistencyReport report;
  report.grid_points = grid + 1;
  // p_bar = K*(z - K u_bar) = K(z - w); the difference is formed exactly.
  const auto deviation = exact_poisson_solve_pwpoly(ex.z - ex.w) - ex.p_bar;

  std::vector<double> jumps;
  for (std::size_t j = 1; j + 1 < ex.u_bar.breakpoints().size(); ++j) jumps.push_back(ex.u_bar.breakpoint(j));

  for (std::size_t k = 0; k <= grid; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(grid);
    report.max_deviation = std::max(report.max_deviation, std::abs(deviation.eval(x)));

    const bool near_jump = std::any_of(jumps.begin(), jumps.end(), [&](double b) { return std::abs(x - b) < 1e-12; });
    if (near_jump) continue;
    const double q = ex.p_bar.eval(x);
    const RegionLabel label = classify_unreg(ex.cfg, q);
    if (label.is_singular()) continue;
    if (ex.u_bar.eval(x) != ex.cfg.levels[label.index]) {
      ++report.classification_violations;
      double depth = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i + 1 < ex.cfg.d(); ++i) depth = std::min(depth, std::abs(q - ex.cfg.threshold(i)));
      report.max_violation_depth = std::max(report.max_violation_depth, depth);
    }
  }
  return report;
}

double reg_measure(const PiecewisePolynomial& p_bar, const MultibangConfig& cfg, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("reg_measure: epsilon must be positive");
  std::vector<std::pair<double, double>> intervals;
  for (std::size_t i = 0; i + 1 < cfg.d(); ++i) {
    const double t = cfg.threshold(i);
    std::vector<double> cuts{0.0, 1.0};
    for (std::size_t j = 1; j + 1 < p_bar.breakpoints().size(); ++j) cuts.push_back(p_bar.breakpoint(j));
    for (double c : {t - epsilon, t + epsilon})
      for (const auto& pt : level_set_points(p_bar, c, 1e-13)) cuts.push_back(pt.x);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      if (!(b > a)) continue;
      if (std::abs(p_bar.eval(0.5 * (a + b)) - t) < epsilon) intervals.emplace_back(a, b);
    }
  }
  std::sort(intervals.begin(), intervals.end());
  double total = 0.0;
  double start = 0.0, end = -1.0;
  for (const auto& [a, b] : intervals) {
    if (a > end) {
      if (end > start) total += end - start;
      start = a;
      end = b;
    } else {
      end = std::max(end, b);
    }
  }
  if (end > start) total += end - start;
  return std::min(total, 1.0);
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) throw std::invalid_argument("geometric_grid: need 0 < lo < hi, points >= 2");
  std::vector<double> out(points);
  const double ratio = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) out[k] = lo * std::exp(ratio * static_cast<double>(k));
  out.back() = hi;
  return out;
}

std::vector<double> default_epsilon_grid() { return geometric_grid(1e-6, 1e-2, 16); }

RegEstimate fit_reg_kappa(const PiecewisePolynomial& p_bar, const MultibangConfig& cfg,
                          const std::vector<double>& epsilon_grid) {
  if (epsilon_grid.size() < 4) throw std::invalid_argument("fit_reg_kappa: need at least 4 epsilons");
  for (double e : epsilon_grid)
    if (!(e > 0.0)) throw std::invalid_argument("fit_reg_kappa: epsilons must be positive");

  RegEstimate est;
  est.epsilons = epsilon_grid;
  std::vector<double> xs, ys;
  for (double e : epsilon_grid) {
    const double m = reg_measure(p_bar, cfg, e);
    est.measures.push_back(m);
    if (m > 0.0) {
      xs.push_back(std::log(e));
      ys.push_back(std::log(m));
    }
  }
  if (xs.size() < 2) throw std::runtime_error("fit_reg_kappa: fewer than two nonzero measures");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  est.kappa_fit = sxy / sxx;
  est.c_fit = std::exp(my - est.kappa_fit * mx);
  return est;
}

LevelGradient min_gradient_on_levelsets(const PiecewisePolynomial& p_bar, const MultibangConfig& cfg) {
  const auto dp = differentiate(p_bar);
  LevelGradient best;
  for (std::size_t i = 0; i + 1 < cfg.d(); ++i) {
    const double t = cfg.threshold(i);
    for (const auto& pt : level_set_points(p_bar, t, 1e-12)) {
      const double g = pt.interval_bound ? 0.0 : std::abs(dp.eval(pt.x));
      // Ties go to the leftmost point.
      if (g < best.min_gradient || (g == best.min_gradient && pt.x < best.location)) best = {g, pt.x, t};
    }
  }
  return best;
}

}  // namespace mbc
