#include "mbc/cli.hpp"

#include "mbc/experiments.hpp"
#include "mbc/harness.hpp"
#include "mbc/solver.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace mbc {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Fills options that were not given on the command line from a key = value
// file. Keys are long option names without dashes.
void apply_config(CLI::App& app, const std::string& path) {
  if (path.empty()) return;
  std::map<std::string, std::string> entries;
  try {
    entries = read_config_file(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  for (const auto& [key, value] : entries) {
    if (key == "config") continue;
    CLI::Option* opt = nullptr;
    try {
      opt = app.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("config file " + path + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    if (opt->get_type_size() == 0) {
      if (value == "1" || value == "true" || value == "yes") {
        opt->add_result("true");
        opt->run_callback();
      }
      continue;
    }
    opt->add_result(value);
    opt->run_callback();
  }
}

void require_example(int id) {
  if (id != 1 && id != 2) throw UsageError("--example must be 1 or 2");
}

double h_from_text(double h) {
  try {
    (void)Mesh1D::from_h(h);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return h;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multibang control of the 1D Poisson equation: solves, rate sweeps and regularity checks.", "multibang"};
  app.require_subcommand(1);
  // -h is taken by the mesh size, so help is --help only.
  app.set_help_flag("--help", "Print this help message and exit");

  std::string config_path;

  // solve
  auto* solve = app.add_subcommand("solve", "Single regularized solve; writes nodal x,u,y,p,lambda");
  int solve_example = 0;
  double solve_gamma = 0.0, solve_h = 0.0, solve_alpha = 2.0;
  int solve_max_iter = SolverOptions{}.max_iter;
  std::string solve_out;
  solve->add_option("--example", solve_example, "1 or 2")->group("Required");
  solve->add_option("--gamma", solve_gamma, "Regularization parameter (> 0)")->group("Required");
  solve->add_option("--h", solve_h, "Mesh size 1/n")->group("Required");
  solve->add_option("--alpha", solve_alpha, "Penalty weight")->capture_default_str();
  solve->add_option("--max-iter", solve_max_iter, "Active-set iteration cap")->capture_default_str();
  solve->add_option("--out", solve_out, "Output CSV (default: stdout)");
  solve->add_option("--config", config_path, "key = value file; flags override it");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "gamma/h sweep with warm starts; writes the rate table");
  int sweep_example = 0;
  std::string sweep_exps, sweep_h, sweep_out;
  unsigned sweep_workers = 0;
  double sweep_alpha = 2.0;
  bool allow_fine = false;
  sweep->add_option("--example", sweep_example, "1 or 2")->group("Required");
  sweep->add_option("--gamma-exponents", sweep_exps, "LO:HI[:STEP], gamma = 2^-e")->group("Required");
  sweep->add_option("--h", sweep_h, "Comma separated mesh sizes")->default_str("1e-4,1e-5");
  sweep->add_option("--out", sweep_out, "Output CSV")->group("Required");
  sweep->add_option("--workers", sweep_workers, "Worker threads (default: MBC_WORKERS or 1)");
  sweep->add_option("--alpha", sweep_alpha, "Penalty weight")->capture_default_str();
  sweep->add_flag("--allow-fine-mesh", allow_fine, "Permit h < 1e-5");
  sweep->add_option("--config", config_path, "key = value file; flags override it");

  // reg-estimate
  auto* reg = app.add_subcommand("reg-estimate", "Measure of near-threshold sets of the optimal adjoint");
  int reg_example = 0;
  std::string reg_eps = "1e-6:1e-2:16", reg_out;
  reg->add_option("--example", reg_example, "1 or 2")->group("Required");
  reg->add_option("--eps", reg_eps, "LO:HI:POINTS geometric grid")->capture_default_str();
  reg->add_option("--out", reg_out, "Output CSV")->group("Required");
  reg->add_option("--config", config_path, "key = value file; flags override it");

  // check
  auto* check = app.add_subcommand("check", "Consistency of the constructed example and level set gradients");
  int check_example = 0;
  check->add_option("--example", check_example, "1 or 2")->group("Required");
  check->add_option("--config", config_path, "key = value file; flags override it");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
    for (auto* sub : app.get_subcommands()) {
      apply_config(*sub, config_path);
      // Required options may come from the config file, so they are checked here.
      for (const auto* opt : sub->get_options())
        if (opt->get_group() == "Required" && opt->count() == 0)
          throw UsageError(opt->get_name() + " is required");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (solve->parsed()) {
      require_example(solve_example);
      if (!(solve_gamma > 0.0) || !std::isfinite(solve_gamma)) throw UsageError("--gamma must be > 0");
      if (!(solve_alpha > 0.0)) throw UsageError("--alpha must be > 0");
      if (solve_max_iter < 1) throw UsageError("--max-iter must be >= 1");
      const Mesh1D mesh = Mesh1D::from_h(h_from_text(solve_h));
      const ExampleProblem ex = build_example(solve_example);
      MultibangConfig cfg = ex.cfg;
      cfg.alpha = solve_alpha;
      cfg.gamma = solve_gamma;
      const ProblemInstance problem(mesh, cfg, ex.z);
      SolverOptions options;
      options.max_iter = solve_max_iter;
      const SolverResult r = active_set_solve(problem, std::nullopt, options);

      std::ostringstream csv;
      csv << "x,u,y,p,lambda\n";
      for (std::size_t j = 0; j < mesh.node_count(); ++j)
        csv << format_double(mesh.node(j)) << ',' << format_double(r.state.u[j]) << ','
            << format_double(r.state.y[j]) << ',' << format_double(r.state.p[j]) << ','
            << format_double(r.state.lambda[j]) << '\n';
      if (solve_out.empty()) {
        out << csv.str();
      } else {
        auto f = open_out(solve_out);
        f << csv.str();
        if (!f.flush()) throw std::runtime_error("failed writing '" + solve_out + "'");
      }
      err << "iterations " << r.iterations << ", residual " << r.optimality_residual
          << (r.converged ? ", converged" : ", not converged") << '\n';
      if (!r.converged) {
        err << "error: " << r.diagnostic << '\n';
        return kExitNotConverged;
      }
      return kExitOk;
    }

    if (sweep->parsed()) {
      require_example(sweep_example);
      SweepConfig cfg;
      cfg.example_id = sweep_example;
      cfg.alpha = sweep_alpha;
      cfg.allow_fine_mesh = allow_fine;
      cfg.worker_count = sweep_workers > 0 ? sweep_workers : default_worker_count();
      cfg.output_path = sweep_out;
      try {
        cfg.gamma_exponents = parse_exponent_range(sweep_exps);
        cfg.h_list = parse_h_list(sweep_h.empty() ? "1e-4,1e-5" : sweep_h);
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const RateTable table = run_sweep(cfg);
      emit_csv(table, cfg.output_path);
      bool all_converged = true;
      for (const auto& row : table.rows) {
        if (!row.converged) {
          all_converged = false;
          err << "gamma " << format_double(row.gamma) << ", h " << format_double(row.h)
              << ": not converged: " << row.diagnostic << '\n';
        }
      }
      out << "wrote " << table.rows.size() << " rows to " << cfg.output_path << '\n';
      return all_converged ? kExitOk : kExitNotConverged;
    }

    if (reg->parsed()) {
      require_example(reg_example);
      std::vector<double> grid;
      try {
        std::vector<std::string> parts;
        std::stringstream ss(reg_eps);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 3) throw std::invalid_argument("--eps must be LO:HI:POINTS");
        const double lo = parse_double(parts[0]);
        const double hi = parse_double(parts[1]);
        const double points = parse_double(parts[2]);
        if (points < 4 || points != std::floor(points)) throw std::invalid_argument("--eps needs POINTS >= 4");
        grid = geometric_grid(lo, hi, static_cast<std::size_t>(points));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const ExampleProblem ex = build_example(reg_example);
      const RegEstimate est = fit_reg_kappa(ex.p_bar, ex.cfg, grid);
      std::ostringstream csv;
      csv << "epsilon,measure,kappa_fit,c_fit\n";
      for (std::size_t k = 0; k < est.epsilons.size(); ++k)
        csv << format_double(est.epsilons[k]) << ',' << format_double(est.measures[k]) << ','
            << format_double(est.kappa_fit) << ',' << format_double(est.c_fit) << '\n';
      auto f = open_out(reg_out);
      f << csv.str();
      if (!f.flush()) throw std::runtime_error("failed writing '" + reg_out + "'");
      out << "kappa_fit " << est.kappa_fit << ", c_fit " << est.c_fit << '\n';
      return kExitOk;
    }

    if (check->parsed()) {
      require_example(check_example);
      const ExampleProblem ex = build_example(check_example);
      const ConsistencyReport rep = consistency_check(ex);
      const LevelGradient lg = min_gradient_on_levelsets(ex.p_bar, ex.cfg);
      out << "example " << ex.id << '\n'
          << "max |K(z - K u_bar) - p_bar|: " << rep.max_deviation << " on " << rep.grid_points << " points\n"
          << "classification violations: " << rep.classification_violations;
      if (rep.classification_violations > 0) out << " (max depth " << rep.max_violation_depth << ")";
      out << '\n'
          << "p_bar(0) = " << ex.p_bar.eval_exact(0).get_str() << ", p_bar(1) = " << ex.p_bar.eval_exact(1).get_str() << " (exact)\n"
          << "min |p_bar'| on threshold level sets: " << lg.min_gradient << " at x = " << lg.location
          << " (threshold " << lg.threshold << ")\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace mbc
