#pragma once

#include "mbc/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mbc {

struct SweepConfig {
  int example_id = 1;
  /// gamma = 2^-e for each exponent.
  std::vector<int> gamma_exponents;
  std::vector<double> h_list{1e-4, 1e-5};
  std::string output_path;
  unsigned worker_count = 1;
  SolverOptions solver;
  double alpha = 2.0;
  /// Meshes finer than h = 1e-5 are rejected unless set.
  bool allow_fine_mesh = false;

  void validate() const;
};

struct RateRow {
  double gamma = 0.0;
  double h = 0.0;
  double err_l2_sq = 0.0;
  double err_l1 = 0.0;
  double err_state_sq = 0.0;
  std::optional<double> kappa;
  int iterations = 0;
  bool converged = false;
  std::string diagnostic;  // not serialized
};

struct RateTable {
  std::vector<RateRow> rows;
};

/// Exponent kappa in err^2 ~ gamma^kappa from errors at gamma and gamma/2:
/// log2(err_sq_at_gamma / err_sq_at_half_gamma).
double kappa_numeric(double err_sq_at_gamma, double err_sq_at_half_gamma);
/// Same for an arbitrary ratio gamma_large / gamma_small > 1.
double kappa_numeric(double err_sq_large_gamma, double err_sq_small_gamma, double gamma_ratio);

/// Runs one warm-started gamma continuation per mesh; lanes run on
/// worker_count threads and rows come back sorted by (h ascending, gamma
/// descending) regardless of completion order. kappa on a row compares it
/// with the next larger gamma of the same mesh, so the largest gamma has none.
RateTable run_sweep(const SweepConfig& cfg);

/// "LO:HI[:STEP]" inclusive.
std::vector<int> parse_exponent_range(std::string_view text);
/// "H1,H2,...".
std::vector<double> parse_h_list(std::string_view text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

inline constexpr std::string_view kRateCsvHeader = "gamma,h,err_l2_sq,err_l1,err_state_sq,kappa,iterations,converged";

std::string format_csv(const RateTable& table);
RateTable parse_csv(std::istream& in);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const RateTable& table, const std::filesystem::path& path);

/// Flat "key = value" file with '#' comments.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// MBC_WORKERS if set to a positive integer, otherwise 1.
unsigned default_worker_count();

}  // namespace mbc
