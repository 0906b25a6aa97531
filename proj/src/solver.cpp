#include "mbc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace mbc {

namespace {

constexpr std::size_t kFields = 4;  // u, y, p, lambda
constexpr std::size_t kU = 0, kY = 1, kP = 2, kL = 3;

double nearest_level(const MultibangConfig& cfg, double v) {
  double best = cfg.levels.front();
  for (double l : cfg.levels)
    if (std::abs(l - v) < std::abs(best - v)) best = l;
  return best;
}

// (A_h v)_j * h for an interior node j of a full nodal vector.
double scaled_stiffness_row(const std::vector<double>& v, std::size_t j) { return -v[j - 1] + 2.0 * v[j] - v[j + 1]; }

// (M_h v)_j * h for an interior node j of a full nodal vector.
double scaled_mass_row(const std::vector<double>& v, std::size_t j, double h) {
  return h * h / 6.0 * (v[j - 1] + 4.0 * v[j] + v[j + 1]);
}

void fill_lambda(const MultibangConfig& cfg, SolverState& s) {
  for (std::size_t j = 0; j < s.u.size(); ++j) s.lambda[j] = (s.p[j] - cfg.gamma * s.u[j]) / cfg.alpha;
}

void require_gamma(const MultibangConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("solver requires gamma > 0");
}

}  // namespace

std::size_t ActiveSetPartition::hash() const {
  std::size_t h = 1469598103934665603ull;
  for (const auto& l : labels) {
    h ^= (static_cast<std::size_t>(l.kind) << 16) | l.index;
    h *= 1099511628211ull;
  }
  return h;
}

std::size_t ActiveSetPartition::singular_count() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](const RegionLabel& l) { return l.is_singular(); }));
}

ProblemInstance::ProblemInstance(const Mesh1D& m, MultibangConfig c, PiecewisePolynomial z)
    : mesh(m), cfg(std::move(c)), target(std::move(z)), target_load(load_vector(mesh, target)) {
  cfg.validate();
}

ProblemInstance ProblemInstance::with_gamma(double gamma) const {
  ProblemInstance out = *this;
  out.cfg.gamma = gamma;
  out.cfg.validate();
  return out;
}

ActiveSetPartition classify_field(const MultibangConfig& cfg, const NodalField& p) {
  require_gamma(cfg);
  ActiveSetPartition out;
  out.labels.reserve(p.mesh.interior_count());
  for (std::size_t j = 1; j < p.mesh.n_elements(); ++j) out.labels.push_back(classify_reg(cfg, p[j]));
  return out;
}

BandedSystem assemble_kkt(const ProblemInstance& problem, const ActiveSetPartition& partition) {
  const auto& cfg = problem.cfg;
  require_gamma(cfg);
  const std::size_t m = problem.mesh.interior_count();
  if (partition.labels.size() != m) throw std::invalid_argument("assemble_kkt: partition length mismatch");
  const double h = problem.mesh.h();
  const double mass = h * h / 6.0;
  const double u_boundary = H_gamma(cfg, 0.0);

  BandedSystem sys{BandMatrix(kFields * m, 5, 5), std::vector<double>(kFields * m, 0.0)};
  auto& a = sys.matrix;
  const auto at = [](std::size_t node, std::size_t field) { return kFields * node + field; };

  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r0 = at(i, 0), r1 = at(i, 1), r2 = at(i, 2), r3 = at(i, 3);

    const RegionLabel label = partition.labels[i];
    if (label.is_singular()) {
      a.set(r0, at(i, kL), 1.0);
      sys.rhs[r0] = cfg.slope(label.index);
    } else {
      a.set(r0, at(i, kU), 1.0);
      sys.rhs[r0] = cfg.levels[label.index];
    }

    a.set(r1, at(i, kY), 2.0);
    a.set(r1, at(i, kU), -4.0 * mass);
    a.set(r2, at(i, kP), 2.0);
    a.set(r2, at(i, kY), 4.0 * mass);
    for (std::size_t nb : {i - 1, i + 1}) {
      if (nb >= m) {  // neighbor is a boundary node (wraps for i == 0)
        sys.rhs[r1] += mass * u_boundary;
        continue;
      }
      a.set(r1, at(nb, kY), -1.0);
      a.set(r1, at(nb, kU), -mass);
      a.set(r2, at(nb, kP), -1.0);
      a.set(r2, at(nb, kY), mass);
    }
    sys.rhs[r2] = h * problem.target_load[i];

    a.set(r3, at(i, kP), -1.0);
    a.set(r3, at(i, kU), cfg.gamma);
    a.set(r3, at(i, kL), cfg.alpha);
  }
  return sys;
}

SolverState active_set_step(const ProblemInstance& problem, const ActiveSetPartition& partition) {
  const auto& cfg = problem.cfg;
  const auto x = assemble_kkt(problem, partition).solve();
  SolverState s(problem.mesh);
  const std::size_t n = problem.mesh.n_elements();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    s.u[i + 1] = x[kFields * i + kU];
    s.y[i + 1] = x[kFields * i + kY];
    s.p[i + 1] = x[kFields * i + kP];
    s.lambda[i + 1] = x[kFields * i + kL];
  }
  const double ub = H_gamma(cfg, 0.0);
  s.u[0] = s.u[n] = ub;
  s.lambda[0] = s.lambda[n] = -cfg.gamma * ub / cfg.alpha;
  s.partition = partition;
  return s;
}

SolverState initial_state(const ProblemInstance& problem) {
  const auto& cfg = problem.cfg;
  const auto& mesh = problem.mesh;
  const std::size_t n = mesh.n_elements();
  const double h = mesh.h();
  SolverState s(mesh);
  std::fill(s.u.values.begin(), s.u.values.end(), nearest_level(cfg, 0.0));

  std::vector<double> rhs(mesh.interior_count());
  for (std::size_t j = 1; j < n; ++j) rhs[j - 1] = scaled_mass_row(s.u.values, j, h) / h;
  s.y = solve_dirichlet(mesh, rhs);
  for (std::size_t j = 1; j < n; ++j) rhs[j - 1] = problem.target_load[j - 1] - scaled_mass_row(s.y.values, j, h) / h;
  s.p = solve_dirichlet(mesh, rhs);
  if (cfg.gamma > 0.0) s.partition = classify_field(cfg, s.p);
  fill_lambda(cfg, s);
  return s;
}

double optimality_residual(const MultibangConfig& cfg, const NodalField& u, const NodalField& p) {
  double r = 0.0;
  for (std::size_t j = 1; j + 1 < u.size(); ++j) r = std::max(r, std::abs(u[j] - H_gamma(cfg, p[j])));
  return r;
}

double subdifferential_violation(const MultibangConfig& cfg, const NodalField& u, const NodalField& lambda) {
  const double tol = 1e-10 * (cfg.highest() - cfg.lowest());
  double worst = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    double v = std::clamp(u[j], cfg.lowest(), cfg.highest());
    for (double l : cfg.levels)
      if (std::abs(v - l) <= tol) v = l;
    const Interval sub = subgradient_interval(cfg, v);
    worst = std::max({worst, sub.lo - lambda[j], lambda[j] - sub.hi});
  }
  return worst;
}

SolverResult active_set_solve(const ProblemInstance& problem, const std::optional<SolverState>& init,
                              const SolverOptions& options) {
  const auto& cfg = problem.cfg;
  require_gamma(cfg);
  if (options.max_iter < 1) throw std::invalid_argument("active_set_solve: max_iter must be at least 1");

  SolverResult result{init ? *init : initial_state(problem), false, 0, 0.0, 0, {}};
  if (!(result.state.u.mesh == problem.mesh)) throw std::invalid_argument("active_set_solve: initial state mesh mismatch");
  ActiveSetPartition partition = classify_field(cfg, result.state.p);
  std::unordered_set<std::size_t> seen{partition.hash()};
  const double tolerance = options.tolerance_scale * (cfg.highest() - cfg.lowest());

  for (int k = 1; k <= options.max_iter; ++k) {
    SolverState next = active_set_step(problem, partition);
    next.iteration = k;
    ActiveSetPartition updated = classify_field(cfg, next.p);
    result.iterations = k;
    result.state = std::move(next);
    result.partition_history_length = seen.size();

    if (updated == partition) {
      result.optimality_residual = optimality_residual(cfg, result.state.u, result.state.p);
      result.converged = result.optimality_residual <= tolerance;
      if (!result.converged) result.diagnostic = "partition fixed but optimality residual above tolerance";
      return result;
    }
    if (!seen.insert(updated.hash()).second) {
      result.optimality_residual = optimality_residual(cfg, result.state.u, result.state.p);
      result.diagnostic = "partition cycle detected at iteration " + std::to_string(k);
      return result;
    }
    partition = std::move(updated);
  }
  result.optimality_residual = optimality_residual(cfg, result.state.u, result.state.p);
  result.partition_history_length = seen.size();
  result.diagnostic = "maximum number of iterations reached";
  return result;
}

SolverState newton_step(const ProblemInstance& problem, const SolverState& state) {
  const auto& cfg = problem.cfg;
  require_gamma(cfg);
  const auto& mesh = problem.mesh;
  const std::size_t n = mesh.n_elements();
  const std::size_t m = mesh.interior_count();
  const double h = mesh.h();
  const double mass = h * h / 6.0;
  const auto& u = state.u.values;
  const auto& y = state.y.values;
  const auto& p = state.p.values;

  // The boundary control follows the nodal relation u = H_gamma(p) with p = 0.
  const double ub = H_gamma(cfg, 0.0);
  const double du_left = ub - u[0], du_right = ub - u[n];

  constexpr std::size_t f = 3;
  const auto at = [](std::size_t node, std::size_t field) { return f * node + field; };
  BandedSystem sys{BandMatrix(f * m, 4, 4), std::vector<double>(f * m, 0.0)};
  auto& a = sys.matrix;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + 1;
    const std::size_t r0 = at(i, 0), r1 = at(i, 1), r2 = at(i, 2);

    // -M du + A dy = -(A y - M u)
    a.set(r0, at(i, 1), 2.0);
    a.set(r0, at(i, 0), -4.0 * mass);
    sys.rhs[r0] = -(scaled_stiffness_row(y, j) - scaled_mass_row(u, j, h));
    // M dy + A* dp = -(A* p + M y - z)
    a.set(r1, at(i, 2), 2.0);
    a.set(r1, at(i, 1), 4.0 * mass);
    sys.rhs[r1] = -(scaled_stiffness_row(p, j) + scaled_mass_row(y, j, h) - h * problem.target_load[i]);
    for (std::size_t nb : {i - 1, i + 1}) {
      if (nb >= m) {
        sys.rhs[r0] += mass * (nb == i + 1 ? du_right : du_left);
        continue;
      }
      a.set(r0, at(nb, 1), -1.0);
      a.set(r0, at(nb, 0), -mass);
      a.set(r1, at(nb, 2), -1.0);
      a.set(r1, at(nb, 1), mass);
    }
    // du - D_N H(p) dp = H(p) - u, the third row with A y^{k+1} = u^{k+1}.
    a.set(r2, at(i, 0), 1.0);
    a.set(r2, at(i, 2), -H_gamma_newton_derivative(cfg, p[j]));
    sys.rhs[r2] = H_gamma(cfg, p[j]) - u[j];
  }
  const auto delta = sys.solve();

  SolverState out(mesh);
  out.u = state.u;
  out.y = state.y;
  out.p = state.p;
  out.u[0] = out.u[n] = ub;
  for (std::size_t i = 0; i < m; ++i) {
    out.u[i + 1] += delta[at(i, 0)];
    out.y[i + 1] += delta[at(i, 1)];
    out.p[i + 1] += delta[at(i, 2)];
  }
  out.y[0] = out.y[n] = out.p[0] = out.p[n] = 0.0;
  fill_lambda(cfg, out);
  out.partition = classify_field(cfg, state.p);
  out.iteration = state.iteration + 1;
  return out;
}

double vi_residual(const ProblemInstance& problem, const NodalField& u, const NodalField& p,
                   const std::vector<NodalField>& test_fields, InnerProduct ip) {
  const auto& cfg = problem.cfg;
  NodalField grad(u.mesh);
  for (std::size_t j = 0; j < u.size(); ++j) grad[j] = -p[j] + cfg.gamma * u[j];

  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : test_fields) {
    if (!(w.mesh == u.mesh)) throw std::invalid_argument("vi_residual: mesh mismatch");
    for (double v : w.values)
      if (v < cfg.lowest() || v > cfg.highest()) throw std::invalid_argument("vi_residual: inadmissible test field");
    NodalField dir(u.mesh);
    for (std::size_t j = 0; j < u.size(); ++j) dir[j] = w[j] - u[j];

    double value = 0.0;
    if (ip == InnerProduct::Consistent) {
      value = mass_inner(grad, dir) + cfg.alpha * G_dir_derivative(cfg, u, dir);
    } else {
      NodalField slope_dir(u.mesh);
      for (std::size_t j = 0; j < u.size(); ++j) slope_dir[j] = g_directional_slope(cfg, u[j], dir[j]) * dir[j];
      NodalField ones(u.mesh, 1.0);
      value = lumped_inner(grad, dir) + cfg.alpha * lumped_inner(slope_dir, ones);
    }
    best = std::min(best, value);
  }
  return best;
}

double discrete_objective(const ProblemInstance& problem, const NodalField& u) {
  const auto& mesh = problem.mesh;
  const std::size_t n = mesh.n_elements();
  std::vector<double> rhs(mesh.interior_count());
  for (std::size_t j = 1; j < n; ++j) rhs[j - 1] = scaled_mass_row(u.values, j, mesh.h()) / mesh.h();
  const NodalField y = solve_dirichlet(mesh, rhs);
  const auto& cfg = problem.cfg;
  return 0.5 * l2_error_sq(y, problem.target) + cfg.alpha * G_eval(cfg, u) + 0.5 * cfg.gamma * mass_inner(u, u);
}

std::vector<SolverResult> gamma_continuation(const ProblemInstance& problem_template, const std::vector<double>& gammas,
                                             const SolverOptions& options) {
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    if (!(gammas[k] > 0.0)) throw std::invalid_argument("gamma_continuation: gammas must be positive");
    if (k > 0 && !(gammas[k] < gammas[k - 1]))
      throw std::invalid_argument("gamma_continuation: gammas must be strictly decreasing");
  }
  std::vector<SolverResult> results;
  results.reserve(gammas.size());
  std::optional<SolverState> warm;
  for (double gamma : gammas) {
    const ProblemInstance problem = problem_template.with_gamma(gamma);
    auto result = active_set_solve(problem, warm, options);
    if (result.converged) warm = result.state;
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace mbc
