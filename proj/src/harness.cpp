#include "mbc/harness.hpp"

#include "mbc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mbc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view text) {
  text = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  return v;
}

std::vector<RateRow> run_lane(const ExampleProblem& ex, const SweepConfig& cfg, double h,
                              const std::vector<double>& gammas) {
  const Mesh1D mesh = Mesh1D::from_h(h);
  MultibangConfig mb = ex.cfg;
  mb.alpha = cfg.alpha;
  const ProblemInstance problem(mesh, mb, ex.z);
  const auto results = gamma_continuation(problem, gammas, cfg.solver);

  std::vector<RateRow> rows;
  rows.reserve(results.size());
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    RateRow row;
    row.gamma = gammas[k];
    row.h = h;
    row.iterations = r.iterations;
    row.diagnostic = r.diagnostic;
    row.err_l2_sq = l2_error_sq(r.state.u, ex.u_bar);
    row.err_l1 = l1_error(r.state.u, ex.u_bar);
    row.err_state_sq = l2_error_sq(r.state.y, ex.w);
    row.converged = r.converged;
    if (row.converged) {
      const auto g_cfg = mb.with_gamma(gammas[k]);
      const double residual = optimality_residual(g_cfg, r.state.u, r.state.p);
      if (residual > cfg.solver.tolerance_scale * (g_cfg.highest() - g_cfg.lowest())) {
        row.converged = false;
        row.diagnostic = "optimality residual re-check failed";
      }
    }
    rows.push_back(std::move(row));
  }
  // kappa of row k compares it with the previous (larger) gamma of the lane.
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& a = rows[k - 1];
    const auto& b = rows[k];
    if (a.converged && b.converged && a.err_l2_sq > 0.0 && b.err_l2_sq > 0.0)
      rows[k].kappa = kappa_numeric(a.err_l2_sq, b.err_l2_sq, a.gamma / b.gamma);
  }
  return rows;
}

}  // namespace

void SweepConfig::validate() const {
  if (example_id != 1 && example_id != 2) throw std::invalid_argument("sweep: example must be 1 or 2");
  for (int e : gamma_exponents)
    if (e <= 0) throw std::invalid_argument("sweep: gamma exponents must be positive");
  for (double h : h_list) {
    (void)Mesh1D::from_h(h);
    if (h < 1e-5 * (1.0 - 1e-9) && !allow_fine_mesh)
      throw std::invalid_argument("sweep: h below 1e-5 requires allow_fine_mesh");
  }
  if (worker_count == 0) throw std::invalid_argument("sweep: worker count must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("sweep: alpha must be positive");
}

double kappa_numeric(double err_sq_at_gamma, double err_sq_at_half_gamma) {
  return kappa_numeric(err_sq_at_gamma, err_sq_at_half_gamma, 2.0);
}

double kappa_numeric(double err_sq_large_gamma, double err_sq_small_gamma, double gamma_ratio) {
  if (!(err_sq_large_gamma > 0.0) || !(err_sq_small_gamma > 0.0))
    throw std::invalid_argument("kappa_numeric: errors must be positive");
  if (!(gamma_ratio > 1.0)) throw std::invalid_argument("kappa_numeric: gamma ratio must exceed 1");
  return std::log(err_sq_large_gamma / err_sq_small_gamma) / std::log(gamma_ratio);
}

RateTable run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  RateTable table;
  std::vector<int> exps = cfg.gamma_exponents;
  std::sort(exps.begin(), exps.end());
  exps.erase(std::unique(exps.begin(), exps.end()), exps.end());
  if (exps.empty() || cfg.h_list.empty()) return table;

  std::vector<double> gammas;
  for (int e : exps) gammas.push_back(std::ldexp(1.0, -e));
  std::vector<double> hs = cfg.h_list;
  std::sort(hs.begin(), hs.end());

  const ExampleProblem ex = build_example(cfg.example_id);
  std::vector<std::vector<RateRow>> lanes(hs.size());
  std::vector<std::exception_ptr> errors(hs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < hs.size(); k = next++) {
      try {
        lanes[k] = run_lane(ex, cfg, hs[k], gammas);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(cfg.worker_count, static_cast<unsigned>(hs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& lane : lanes)
    for (auto& row : lane) table.rows.push_back(std::move(row));
  return table;
}

std::vector<int> parse_exponent_range(std::string_view text) {
  const auto parts = split(trim(text), ':');
  if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("exponent range must be LO:HI[:STEP]");
  const int lo = parse_int(parts[0]);
  const int hi = parse_int(parts[1]);
  const int step = parts.size() == 3 ? parse_int(parts[2]) : 1;
  if (step <= 0 || hi < lo) throw std::invalid_argument("exponent range needs LO <= HI and STEP > 0");
  std::vector<int> out;
  for (int e = lo; e <= hi; e += step) out.push_back(e);
  return out;
}

std::vector<double> parse_h_list(std::string_view text) {
  std::vector<double> out;
  for (auto part : split(trim(text), ',')) out.push_back(parse_double(part));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return {buf, ptr};
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return v;
}

std::string format_csv(const RateTable& table) {
  std::string out(kRateCsvHeader);
  out += '\n';
  for (const auto& r : table.rows) {
    out += format_double(r.gamma) + ',' + format_double(r.h) + ',' + format_double(r.err_l2_sq) + ',' +
           format_double(r.err_l1) + ',' + format_double(r.err_state_sq) + ',' +
           (r.kappa ? format_double(*r.kappa) : std::string()) + ',' + std::to_string(r.iterations) + ',' +
           (r.converged ? "1" : "0") + '\n';
  }
  return out;
}

RateTable parse_csv(std::istream& in) {
  RateTable table;
  std::string line;
  if (!std::getline(in, line) || trim(line) != kRateCsvHeader) throw std::invalid_argument("rate csv: bad header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 8) throw std::invalid_argument("rate csv: expected 8 fields");
    RateRow r;
    r.gamma = parse_double(f[0]);
    r.h = parse_double(f[1]);
    r.err_l2_sq = parse_double(f[2]);
    r.err_l1 = parse_double(f[3]);
    r.err_state_sq = parse_double(f[4]);
    if (!trim(f[5]).empty()) r.kappa = parse_double(f[5]);
    r.iterations = parse_int(f[6]);
    r.converged = parse_int(f[7]) != 0;
    table.rows.push_back(std::move(r));
  }
  return table;
}

void emit_csv(const RateTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << format_csv(table);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    out[std::string(trim(view.substr(0, eq)))] = std::string(trim(view.substr(eq + 1)));
  }
  return out;
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("MBC_WORKERS")) {
    try {
      const int v = parse_int(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::invalid_argument&) {
    }
  }
  return 1;
}

}  // namespace mbc
