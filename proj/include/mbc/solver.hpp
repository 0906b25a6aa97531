#pragma once

#include "mbc/banded.hpp"
#include "mbc/fem1d.hpp"
#include "mbc/penalty.hpp"
#include "mbc/piecewise_poly.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mbc {

/// One region label per interior node.
struct ActiveSetPartition {
  std::vector<RegionLabel> labels;

  std::size_t hash() const;
  std::size_t singular_count() const;
  friend bool operator==(const ActiveSetPartition&, const ActiveSetPartition&) = default;
};

/// Tracking problem min 1/2 |K_h u - z|^2 + alpha G(u) + gamma/2 |u|^2 on a mesh.
struct ProblemInstance {
  Mesh1D mesh;
  MultibangConfig cfg;
  PiecewisePolynomial target;
  std::vector<double> target_load;  // (z, phi_j) on interior nodes

  ProblemInstance(const Mesh1D& mesh, MultibangConfig cfg, PiecewisePolynomial target);
  ProblemInstance with_gamma(double gamma) const;
};

struct SolverState {
  NodalField u, y, p, lambda;
  ActiveSetPartition partition;
  int iteration = 0;

  explicit SolverState(const Mesh1D& mesh) : u(mesh), y(mesh), p(mesh), lambda(mesh) {}
};

struct SolverOptions {
  int max_iter = 100;
  /// Converged solves satisfy |u - H_gamma(p)| <= tolerance_scale (u_d - u_1) nodewise.
  double tolerance_scale = 1e-10;
};

struct SolverResult {
  SolverState state;
  bool converged = false;
  int iterations = 0;
  double optimality_residual = 0.0;
  std::size_t partition_history_length = 0;
  std::string diagnostic;
};

ActiveSetPartition classify_field(const MultibangConfig& cfg, const NodalField& p);

/// Full KKT system of an active-set step in the unknowns (u, y, p, lambda)
/// on interior nodes, interleaved per node. Rows of node j:
///   partition row:  u_j = u_i (Regular(i))  or  lambda_j = (u_i + u_{i+1})/2 (Singular(i))
///   state row:      h (A_h y - M_h u)_j = 0
///   adjoint row:    h (A_h p + M_h y)_j = h (z, phi_j)
///   multiplier row: -p_j + gamma u_j + alpha lambda_j = 0
/// Boundary controls are fixed to H_gamma(0) and enter the state row's rhs.
BandedSystem assemble_kkt(const ProblemInstance& problem, const ActiveSetPartition& partition);

/// Solves the KKT system for a fixed partition.
SolverState active_set_step(const ProblemInstance& problem, const ActiveSetPartition& partition);

/// u = nearest level to 0, y = K_h u, p the corresponding adjoint state.
SolverState initial_state(const ProblemInstance& problem);

SolverResult active_set_solve(const ProblemInstance& problem, const std::optional<SolverState>& init = std::nullopt,
                              const SolverOptions& options = {});

/// One semismooth Newton step in (u, y, p) with D_N H_gamma(p^k); lambda is
/// recovered from -p + gamma u + alpha lambda = 0.
SolverState newton_step(const ProblemInstance& problem, const SolverState& state);

double optimality_residual(const MultibangConfig& cfg, const NodalField& u, const NodalField& p);

/// Largest violation of lambda in the subdifferential of g at u, nodewise.
double subdifferential_violation(const MultibangConfig& cfg, const NodalField& u, const NodalField& lambda);

enum class InnerProduct { Lumped, Consistent };

/// min over w of (-p + gamma u, w - u) + alpha G'(u; w - u). The lumped
/// variant uses nodal quadrature for both terms, which is the discrete
/// optimality condition satisfied by active-set fixed points.
double vi_residual(const ProblemInstance& problem, const NodalField& u, const NodalField& p,
                   const std::vector<NodalField>& test_fields, InnerProduct ip = InnerProduct::Lumped);

/// 1/2 |y - z|^2 + alpha G(u) + gamma/2 |u|^2 with y = K_h u.
double discrete_objective(const ProblemInstance& problem, const NodalField& u);

/// Solves for each gamma (strictly decreasing) warm-starting from the last
/// converged state. Failures are recorded and do not stop the sequence.
std::vector<SolverResult> gamma_continuation(const ProblemInstance& problem_template,
                                             const std::vector<double>& gammas, const SolverOptions& options = {});

}  // namespace mbc
