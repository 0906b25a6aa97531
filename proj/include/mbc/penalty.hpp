#pragma once

#include "mbc/fem1d.hpp"

#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

namespace mbc {

/// Control levels u_1 < ... < u_d, penalty weight alpha and regularization gamma.
struct MultibangConfig {
  std::vector<double> levels;
  double alpha = 1.0;
  double gamma = 0.0;

  /// Throws std::invalid_argument unless d >= 2, levels strictly increase,
  /// alpha > 0 and gamma >= 0.
  void validate() const;

  std::size_t d() const { return levels.size(); }
  double lowest() const { return levels.front(); }
  double highest() const { return levels.back(); }
  /// Slope of g on [u_i, u_{i+1}] (0-based i): (u_i + u_{i+1}) / 2.
  double slope(std::size_t i) const { return 0.5 * (levels[i] + levels[i + 1]); }
  /// alpha/2 (u_i + u_{i+1}).
  double threshold(std::size_t i) const { return alpha * slope(i); }
  /// Closed singular band [threshold + gamma u_i, threshold + gamma u_{i+1}].
  double band_lower(std::size_t i) const { return threshold(i) + gamma * levels[i]; }
  double band_upper(std::size_t i) const { return threshold(i) + gamma * levels[i + 1]; }

  MultibangConfig with_gamma(double g) const;
};

/// Region of adjoint values. Indices are 0-based: Regular(i) pins the
/// control to levels[i], Singular(i) is the band between levels[i] and
/// levels[i+1].
struct RegionLabel {
  enum class Kind : std::uint8_t { Regular, Singular };
  Kind kind = Kind::Regular;
  std::uint16_t index = 0;

  static constexpr RegionLabel regular(std::size_t i) { return {Kind::Regular, static_cast<std::uint16_t>(i)}; }
  static constexpr RegionLabel singular(std::size_t i) { return {Kind::Singular, static_cast<std::uint16_t>(i)}; }
  bool is_singular() const { return kind == Kind::Singular; }

  friend bool operator==(const RegionLabel&, const RegionLabel&) = default;
};

std::ostream& operator<<(std::ostream& os, const RegionLabel& label);

/// Closed interval with possibly infinite endpoints.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

double g_eval(const MultibangConfig& cfg, double v);
Interval subgradient_interval(const MultibangConfig& cfg, double v);

/// Exact G(u) for a P1 field: elements are split at level crossings and g is
/// affine on every sub-segment.
double G_eval(const MultibangConfig& cfg, const NodalField& u);

/// Directional derivative G'(u; v) for v in the tangent cone of U_ad at u.
double G_dir_derivative(const MultibangConfig& cfg, const NodalField& u, const NodalField& v);

/// One-sided slope of g at v in direction sign(dir): the directional
/// derivative g'(v; dir) divided by dir.
double g_directional_slope(const MultibangConfig& cfg, double v, double dir);

RegionLabel classify_unreg(const MultibangConfig& cfg, double q);
RegionLabel classify_reg(const MultibangConfig& cfg, double q);

double H_gamma(const MultibangConfig& cfg, double q);
double H_gamma_newton_derivative(const MultibangConfig& cfg, double q);

}  // namespace mbc
