#include "mbc/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mbc {

namespace {

double level_tolerance(const MultibangConfig& cfg) { return 1e-12 * (cfg.highest() - cfg.lowest()); }

// Segment [u_i, u_{i+1}] containing v (v inside the domain).
std::size_t segment_of(const MultibangConfig& cfg, double v) {
  const auto it = std::upper_bound(cfg.levels.begin(), cfg.levels.end(), v);
  const auto i = static_cast<std::size_t>(it - cfg.levels.begin());
  return std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, cfg.d() - 2);
}

// Level index within tolerance of v, or d() when v is strictly between levels.
std::size_t level_at(const MultibangConfig& cfg, double v, double tol) {
  for (std::size_t i = 0; i < cfg.d(); ++i)
    if (std::abs(v - cfg.levels[i]) <= tol) return i;
  return cfg.d();
}

void require_regularized(const MultibangConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("regularized penalty map requires gamma > 0");
}

void require_admissible(const MultibangConfig& cfg, const NodalField& u) {
  for (double v : u.values)
    if (v < cfg.lowest() || v > cfg.highest()) throw std::domain_error("nodal value outside [u_1, u_d]");
}

}  // namespace

void MultibangConfig::validate() const {
  if (levels.size() < 2) throw std::invalid_argument("MultibangConfig: need at least two levels");
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    if (!(levels[i] < levels[i + 1])) throw std::invalid_argument("MultibangConfig: levels must strictly increase");
  if (!(alpha > 0.0)) throw std::invalid_argument("MultibangConfig: alpha must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("MultibangConfig: gamma must be nonnegative");
}

MultibangConfig MultibangConfig::with_gamma(double g) const {
  MultibangConfig out = *this;
  out.gamma = g;
  return out;
}

std::ostream& operator<<(std::ostream& os, const RegionLabel& label) {
  if (label.is_singular()) return os << "Singular(" << label.index + 1 << ',' << label.index + 2 << ')';
  return os << "Regular(" << label.index + 1 << ')';
}

double g_eval(const MultibangConfig& cfg, double v) {
  if (v < cfg.lowest() || v > cfg.highest()) throw std::domain_error("g_eval: v outside dom g");
  const std::size_t i = segment_of(cfg, v);
  return 0.5 * ((cfg.levels[i] + cfg.levels[i + 1]) * v - cfg.levels[i] * cfg.levels[i + 1]);
}

Interval subgradient_interval(const MultibangConfig& cfg, double v) {
  if (v < cfg.lowest() || v > cfg.highest()) throw std::domain_error("subgradient_interval: v outside dom g");
  const std::size_t d = cfg.d();
  for (std::size_t i = 0; i < d; ++i) {
    if (v != cfg.levels[i]) continue;
    Interval out;
    if (i > 0) out.lo = cfg.slope(i - 1);
    if (i + 1 < d) out.hi = cfg.slope(i);
    return out;
  }
  const double s = cfg.slope(segment_of(cfg, v));
  return {s, s};
}

double g_directional_slope(const MultibangConfig& cfg, double v, double dir) {
  const std::size_t d = cfg.d();
  const std::size_t at = level_at(cfg, v, level_tolerance(cfg));
  if (at == d) return cfg.slope(segment_of(cfg, v));
  if (dir >= 0.0) return cfg.slope(std::min(at, d - 2));
  return cfg.slope(at == 0 ? 0 : at - 1);
}

double G_eval(const MultibangConfig& cfg, const NodalField& u) {
  require_admissible(cfg, u);
  const double h = u.mesh.h();
  double total = 0.0;
  std::vector<double> cuts;
  for (std::size_t e = 0; e < u.mesh.n_elements(); ++e) {
    const double a = u.values[e], b = u.values[e + 1];
    cuts.assign({0.0});
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (double level : cfg.levels)
      if (level > lo && level < hi) cuts.push_back((level - a) / (b - a));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(1.0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double tm = 0.5 * (cuts[k] + cuts[k + 1]);
      total += h * (cuts[k + 1] - cuts[k]) * g_eval(cfg, a + tm * (b - a));
    }
  }
  return total;
}

double G_dir_derivative(const MultibangConfig& cfg, const NodalField& u, const NodalField& v) {
  if (!(u.mesh == v.mesh)) throw std::invalid_argument("G_dir_derivative: mesh mismatch");
  require_admissible(cfg, u);
  const double tol = level_tolerance(cfg);
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (std::abs(u[j] - cfg.lowest()) <= tol && v[j] < -tol)
      throw std::invalid_argument("G_dir_derivative: direction leaves U_ad at u = u_1");
    if (std::abs(u[j] - cfg.highest()) <= tol && v[j] > tol)
      throw std::invalid_argument("G_dir_derivative: direction leaves U_ad at u = u_d");
  }
  const double h = u.mesh.h();
  double total = 0.0;
  std::vector<double> cuts;
  for (std::size_t e = 0; e < u.mesh.n_elements(); ++e) {
    const double a = u[e], b = u[e + 1];
    const double va = v[e], vb = v[e + 1];
    cuts.assign({0.0});
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (hi - lo > tol) {
      for (double level : cfg.levels)
        if (level > lo && level < hi) cuts.push_back((level - a) / (b - a));
    }
    if ((va < 0 && vb > 0) || (va > 0 && vb < 0)) cuts.push_back(va / (va - vb));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(1.0);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double tm = 0.5 * (cuts[k] + cuts[k + 1]);
      const double um = a + tm * (b - a);
      const double vm = va + tm * (vb - va);
      // Away from S_i the midpoint lies strictly between two levels.
      const bool on_level = hi - lo <= tol && level_at(cfg, um, tol) < cfg.d();
      const double slope = on_level ? g_directional_slope(cfg, um, vm) : cfg.slope(segment_of(cfg, um));
      total += h * (cuts[k + 1] - cuts[k]) * slope * vm;
    }
  }
  return total;
}

RegionLabel classify_unreg(const MultibangConfig& cfg, double q) {
  const double tol = 1e-12 * (1.0 + std::abs(q));
  std::size_t below = 0;
  for (std::size_t i = 0; i + 1 < cfg.d(); ++i) {
    const double t = cfg.threshold(i);
    if (std::abs(q - t) <= tol) return RegionLabel::singular(i);
    if (t < q) ++below;
  }
  return RegionLabel::regular(below);
}

RegionLabel classify_reg(const MultibangConfig& cfg, double q) {
  require_regularized(cfg);
  std::size_t below = 0;
  for (std::size_t i = 0; i + 1 < cfg.d(); ++i) {
    if (q >= cfg.band_lower(i) && q <= cfg.band_upper(i)) return RegionLabel::singular(i);
    if (cfg.band_upper(i) < q) ++below;
  }
  return RegionLabel::regular(below);
}

double H_gamma(const MultibangConfig& cfg, double q) {
  const RegionLabel label = classify_reg(cfg, q);
  if (!label.is_singular()) return cfg.levels[label.index];
  const std::size_t i = label.index;
  return std::clamp((q - cfg.threshold(i)) / cfg.gamma, cfg.levels[i], cfg.levels[i + 1]);
}

double H_gamma_newton_derivative(const MultibangConfig& cfg, double q) {
  return classify_reg(cfg, q).is_singular() ? 1.0 / cfg.gamma : 0.0;
}

}  // namespace mbc
