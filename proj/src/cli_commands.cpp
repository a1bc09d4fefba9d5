#include "ensel/cli.hpp"

#include "ensel/dko_theory.hpp"
#include "ensel/lasso.hpp"
#include "ensel/recon_limit.hpp"
#include "ensel/simulator.hpp"
#include "ensel/ss_theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace ensel {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& token) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + token + "'");
  }
  if (used != token.size()) throw ConfigError("not a number: '" + token + "'");
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

// Runs fn(0..count-1) on up to `workers` threads; each index is written
// by exactly one worker so results are independent of scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> json_grid(const nlohmann::json& node, const std::string& key) {
  if (node.is_string()) return parse_grid(node.get<std::string>());
  if (node.is_array()) return node.get<std::vector<double>>();
  if (node.is_number()) return {node.get<double>()};
  throw ConfigError("grid '" + key + "' must be an array, a number or a grid string");
}

template <typename T>
void read_key(const nlohmann::json& section, const std::string& key, T& target) {
  try {
    target = section.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& section, const std::string& where,
                    std::initializer_list<const char*> known) {
  if (!section.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  for (const auto& item : section.items()) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return item.key() == k; });
    if (!ok) throw ConfigError("unknown config key '" + where + "." + item.key() + "'");
  }
}

std::string solve_header(Method method) {
  if (method == Method::kDko) {
    return "lambda,q,m,chi,v,v_knock,chi_knock,q_hat,q_hat_knock,m_hat,chi_hat,v_hat,v_hat_knock,"
           "residual,iterations,converged,prediction_error,tpr,fdr";
  }
  return "lambda,q,m,chi,v,q_hat,m_hat,chi_hat,v_hat,residual,iterations,converged,"
         "prediction_error,tpr,fdr";
}

// One CSV row; false when the solve did not converge.
bool solve_row(const RunConfig& config, double lambda, std::string& row) {
  ProblemConfig problem = config.problem;
  problem.lambda = lambda;
  std::vector<double> values;
  FixedPointReport report;
  double error = 0.0;
  Rates rates;
  const std::size_t width = config.method == Method::kDko ? 12 : 8;
  try {
    if (config.method == Method::kDko) {
      const DkoSolution sol = solve_dko(problem, config.solver);
      const auto& o = sol.order;
      const auto& h = sol.hats;
      values = {o.q, o.m, o.chi, o.v, o.v_knock, o.chi_knock,
                h.q_hat, h.q_hat_knock, h.m_hat, h.chi_hat, h.v_hat, h.v_hat_knock};
      report = sol.report;
      error = dko_prediction_error(sol);
      rates = dko_tpr_fdr(sol, config.thresholds);
    } else {
      const SsSolution sol = config.method == Method::kLasso
                                 ? vanilla_lasso_solution(problem, config.solver)
                                 : solve_ss(problem, config.solver);
      const auto& o = sol.order;
      const auto& h = sol.hats;
      values = {o.q, o.m, o.chi, o.v, h.q_hat, h.m_hat, h.chi_hat, h.v_hat};
      report = sol.report;
      error = ss_prediction_error(sol);
      rates = ss_tpr_fdr(sol, config.method == Method::kLasso ? 0.5 : config.thresholds.pi_th);
    }
  } catch (const DivergedError& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    values.assign(width, nan);
    report.residual = nan;
    report.iterations = e.iteration();
    report.converged = false;
    error = nan;
    rates = {nan, nan};
  }
  std::ostringstream os;
  os << fmt(lambda);
  for (const double x : values) os << ',' << fmt(x);
  os << ',' << fmt(report.residual) << ',' << report.iterations << ',' << (report.converged ? 1 : 0)
     << ',' << fmt(error) << ',' << fmt(rates.tpr) << ',' << fmt(rates.fdr);
  row = os.str();
  return report.converged;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? header.size() : static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  table.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != table.header.size()) {
      throw ConfigError("'" + path + "': row width differs from header");
    }
    std::vector<double> row;
    for (const auto& cell : cells) row.push_back(parse_number(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

bool same_lambda(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 4 && (parts[0] == "lin" || parts[0] == "log")) {
    const double lo = parse_number(parts[1]);
    const double hi = parse_number(parts[2]);
    const double count = parse_number(parts[3]);
    if (!(count >= 1.0) || count != std::floor(count)) throw ConfigError("grid count must be a positive integer");
    if (parts[0] == "log" && !(lo > 0.0 && hi > 0.0)) throw ConfigError("log grid needs positive bounds");
    const int n = static_cast<int>(count);
    return parts[0] == "lin" ? linspace(lo, hi, n) : logspace(lo, hi, n);
  }
  if (parts.size() != 1) throw ConfigError("bad grid '" + text + "' (use a,b,c or lin:lo:hi:n or log:lo:hi:n)");
  std::vector<double> out;
  for (const auto& token : split(text, ',')) out.push_back(parse_number(token));
  if (out.empty()) throw ConfigError("empty grid");
  return out;
}

std::vector<double> RunConfig::lambdas() const {
  std::vector<double> grid = lambda_grid.empty() ? std::vector<double>{problem.lambda} : lambda_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

void RunConfig::validate() const {
  try {
    problem.validate();
    solver.validate();
    for (const double lambda : lambda_grid) {
      ProblemConfig c = problem;
      c.lambda = lambda;
      c.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (const double rho : rho_grid) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho grid entries must lie in (0, 1)");
  }
  if (!(thresholds.pi_th >= 0.0 && thresholds.pi_th <= 1.0)) throw ConfigError("pi_th must lie in [0, 1]");
  if (!(thresholds.z_th >= 0.0)) throw ConfigError("z_th must be nonnegative");
  if (!(dko_pi_th >= 0.0 && dko_pi_th <= 1.0)) throw ConfigError("dko_pi_th must lie in [0, 1]");
  if (n < 1) throw ConfigError("n must be positive");
  if (repeats < 2) throw ConfigError("repeats must be at least 2");
  if (realizations < 8) throw ConfigError("realizations must be at least 8");
  if (workers < 1) throw ConfigError("workers must be positive");
}

void apply_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  reject_unknown(root, "<root>",
                 {"method", "problem", "thresholds", "solver", "grids", "simulation", "output"});
  if (root.contains("method")) {
    std::string name;
    read_key(root, "method", name);
    try {
      config.method = parse_method(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    config.method_given = true;
  }
  if (root.contains("problem")) {
    const auto& s = root["problem"];
    reject_unknown(s, "problem", {"alpha", "rho", "delta", "lambda", "mu_b"});
    if (s.contains("alpha")) read_key(s, "alpha", config.problem.alpha);
    if (s.contains("rho")) read_key(s, "rho", config.problem.rho);
    if (s.contains("delta")) read_key(s, "delta", config.problem.delta);
    if (s.contains("mu_b")) read_key(s, "mu_b", config.problem.mu_b);
    if (s.contains("lambda")) {
      read_key(s, "lambda", config.problem.lambda);
      config.lambda_given = true;
    }
  }
  if (root.contains("thresholds")) {
    const auto& s = root["thresholds"];
    reject_unknown(s, "thresholds", {"pi_th", "z_th", "dko_pi_th"});
    if (s.contains("pi_th")) read_key(s, "pi_th", config.thresholds.pi_th);
    if (s.contains("z_th")) read_key(s, "z_th", config.thresholds.z_th);
    if (s.contains("dko_pi_th")) read_key(s, "dko_pi_th", config.dko_pi_th);
  }
  if (root.contains("solver")) {
    const auto& s = root["solver"];
    reject_unknown(s, "solver", {"damping", "tol", "max_iter", "min_clip"});
    if (s.contains("damping")) read_key(s, "damping", config.solver.damping);
    if (s.contains("tol")) read_key(s, "tol", config.solver.tol);
    if (s.contains("max_iter")) read_key(s, "max_iter", config.solver.max_iter);
    if (s.contains("min_clip")) read_key(s, "min_clip", config.solver.min_clip);
  }
  if (root.contains("grids")) {
    const auto& s = root["grids"];
    reject_unknown(s, "grids", {"lambda", "rho", "threshold"});
    if (s.contains("lambda")) {
      config.lambda_grid = json_grid(s["lambda"], "lambda");
      config.lambda_given = true;
    }
    if (s.contains("rho")) config.rho_grid = json_grid(s["rho"], "rho");
    if (s.contains("threshold")) config.threshold_grid = json_grid(s["threshold"], "threshold");
  }
  if (root.contains("simulation")) {
    const auto& s = root["simulation"];
    reject_unknown(s, "simulation", {"n", "repeats", "realizations", "seed", "workers"});
    if (s.contains("n")) read_key(s, "n", config.n);
    if (s.contains("repeats")) read_key(s, "repeats", config.repeats);
    if (s.contains("realizations")) read_key(s, "realizations", config.realizations);
    if (s.contains("seed")) read_key(s, "seed", config.seed);
    if (s.contains("workers")) read_key(s, "workers", config.workers);
  }
  if (root.contains("output")) read_key(root, "output", config.out);
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
  if (config.method == Method::kKo) throw ConfigError("solve: method must be ss, dko or lasso");
  const auto lambdas = config.lambdas();
  std::vector<std::string> rows(lambdas.size());
  std::vector<char> converged(lambdas.size(), 0);
  parallel_for(static_cast<int>(lambdas.size()), config.workers, [&](int j) {
    converged[j] = solve_row(config, lambdas[j], rows[j]);
  });
  out << solve_header(config.method) << '\n';
  for (const auto& row : rows) out << row << '\n';
  const bool all = std::all_of(converged.begin(), converged.end(), [](char c) { return c != 0; });
  return all ? kExitOk : kExitNumerical;
}

int cmd_power_curve(const RunConfig& config, std::ostream& out, std::ostream& log) {
  ProblemConfig problem = config.problem;
  PowerCurve curve;
  if (config.method == Method::kLasso) {
    const auto grid = config.threshold_grid.empty() ? default_lambda_grid() : config.threshold_grid;
    curve = lasso_power_curve(problem, grid, config.solver);
  } else {
    if (!config.lambda_given) {
      problem.lambda = optimal_lambda(config.method, problem, config.solver).lambda;
    }
    log << "lambda=" << fmt(problem.lambda) << '\n';
    if (config.method == Method::kSs) {
      const SsSolution sol = solve_ss(problem, config.solver);
      curve = ss_power_curve(sol, config.threshold_grid.empty() ? default_pi_grid()
                                                                : config.threshold_grid);
    } else {
      const DkoSolution sol = solve_dko(problem, config.solver);
      const auto grid = config.threshold_grid.empty() ? default_z_grid(sol) : config.threshold_grid;
      curve = config.method == Method::kDko ? dko_power_curve(sol, grid, config.dko_pi_th)
                                            : ko_power_curve(sol, grid);
    }
  }
  out << "threshold,fdr,tpr\n";
  for (const auto& p : curve) out << fmt(p.threshold) << ',' << fmt(p.fdr) << ',' << fmt(p.tpr) << '\n';
  return kExitOk;
}

int cmd_phase_boundary(const RunConfig& config, std::ostream& out) {
  const auto rho = config.rho_grid.empty() ? linspace(0.01, 0.99, 99) : config.rho_grid;
  const std::vector<ReconAlgorithm> algorithms{
      {ReconAlgorithm::Kind::kSs, 1.0}, {ReconAlgorithm::Kind::kSs, 2.0}, {ReconAlgorithm::Kind::kDko, 1.0}};
  std::vector<std::vector<PhasePoint>> curves(algorithms.size());
  parallel_for(static_cast<int>(algorithms.size()), config.workers,
               [&](int a) { curves[a] = phase_boundary_curve(algorithms[a], rho); });
  out << "rho,alpha_c_ss_mu1,alpha_c_ss_mu2,alpha_c_dko\n";
  for (std::size_t i = 0; i < rho.size(); ++i) {
    out << fmt(rho[i]);
    for (const auto& curve : curves) out << ',' << fmt(curve[i].alpha_critical);
    out << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  const auto lambdas = config.lambdas();
  ExperimentOptions options;
  options.workers = config.workers;
  const auto results = run_experiment_path(config.n, config.problem, lambdas, config.method,
                                           config.repeats, config.realizations, config.thresholds,
                                           config.seed, options);
  const auto& first = results.front();
  ordered_json doc;
  doc["algorithm"] = to_string(config.method);
  doc["config"] = {{"alpha", config.problem.alpha},
                   {"rho", config.problem.rho},
                   {"delta", config.problem.delta},
                   {"mu_b", config.problem.mu_b}};
  doc["thresholds"] = {{"pi_th", config.thresholds.pi_th}, {"z_th", config.thresholds.z_th}};
  doc["n"] = first.n;
  doc["m"] = first.m;
  doc["repeats"] = first.repeats;
  doc["data_realizations"] = first.data_realizations;
  doc["master_seed"] = first.master_seed;
  doc["data_seeds"] = first.data_seeds;
  doc["draw_seeds"] = first.draw_seeds;
  ordered_json rows = ordered_json::array();
  for (const auto& res : results) {
    ordered_json row;
    row["lambda"] = res.config.lambda;
    ordered_json stats;
    for (const auto& [name, est] : res.statistics) {
      stats[name] = {{"mean", est.mean}, {"std_error", est.std_error}};
    }
    row["statistics"] = std::move(stats);
    row["selection_prob"] =
        std::vector<double>(res.selection_prob.data(), res.selection_prob.data() + res.selection_prob.size());
    rows.push_back(std::move(row));
  }
  doc["results"] = std::move(rows);
  out << doc.dump(2) << '\n';
  return kExitOk;
}

CompareRow compare_cell(std::string statistic, double lambda, double theory, double empirical,
                        double std_error) {
  CompareRow row{std::move(statistic), lambda, theory, empirical, std_error, 0.0, false};
  const double diff = std::abs(theory - empirical);
  if (std_error > 0.0) {
    row.z = diff / std_error;
    row.pass = row.z <= 4.0;
  } else {
    row.pass = diff <= 1e-8;
    row.z = row.pass ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (std::isnan(diff)) {
    row.z = std::numeric_limits<double>::quiet_NaN();
    row.pass = false;
  }
  return row;
}

bool compare_overall_pass(const std::vector<CompareRow>& rows) {
  if (rows.empty()) return false;
  std::size_t within4 = 0;
  for (const auto& r : rows) {
    if (r.pass) ++within4;
    const bool within6 = r.std_error > 0.0 ? r.z <= 6.0 : r.pass;
    if (!within6) return false;
  }
  return 10 * within4 >= 9 * rows.size();
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& log) {
  if (config.theory_path.empty() || config.empirical_path.empty()) {
    throw ConfigError("compare needs --theory and --empirical");
  }
  const CsvTable theory = read_csv(config.theory_path);
  nlohmann::json empirical;
  {
    std::ifstream in(config.empirical_path);
    if (!in) throw ConfigError("cannot open '" + config.empirical_path + "'");
    try {
      empirical = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("'" + config.empirical_path + "': " + e.what());
    }
  }
  const std::size_t lambda_col = theory.column("lambda");
  if (lambda_col == theory.header.size()) throw ConfigError("theory table has no lambda column");
  if (!empirical.contains("results") || !empirical["results"].is_array()) {
    throw ConfigError("empirical record has no results array");
  }
  const auto& results = empirical["results"];
  if (results.size() != theory.rows.size()) throw ConfigError("compare: lambda grids differ in length");

  std::vector<CompareRow> rows;
  try {
    for (std::size_t j = 0; j < results.size(); ++j) {
      const double lambda = results[j].at("lambda").get<double>();
      const auto& trow = theory.rows[j];
      if (!same_lambda(lambda, trow[lambda_col])) {
        throw ConfigError("compare: lambda grids differ at row " + std::to_string(j));
      }
      for (const auto& [name, est] : results[j].at("statistics").items()) {
        const std::size_t col = theory.column(name);
        if (col == theory.header.size()) continue;  // no theory counterpart
        rows.push_back(compare_cell(name, lambda, trow[col], est.at("mean").get<double>(),
                                    est.at("std_error").get<double>()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("empirical record: ") + e.what());
  }

  out << "statistic,lambda,theory,empirical,std_error,z,pass\n";
  std::size_t passed = 0;
  for (const auto& r : rows) {
    out << r.statistic << ',' << fmt(r.lambda) << ',' << fmt(r.theory) << ',' << fmt(r.empirical)
        << ',' << fmt(r.std_error) << ',' << fmt(r.z) << ',' << (r.pass ? 1 : 0) << '\n';
    passed += r.pass ? 1 : 0;
  }
  const bool overall = compare_overall_pass(rows);
  log << "compare: " << passed << "/" << rows.size() << " cells within 4 SE, overall "
      << (overall ? "PASS" : "FAIL") << '\n';
  return overall ? kExitOk : kExitVerdict;
}

int cmd_lambda_opt(const RunConfig& config, std::ostream& out) {
  std::vector<std::pair<Method, double>> jobs;  // (method, mu_b)
  if (config.method_given) {
    jobs.emplace_back(config.method, config.problem.mu_b);
  } else {
    jobs = {{Method::kSs, 1.0}, {Method::kSs, 2.0}, {Method::kDko, 1.0}, {Method::kLasso, 1.0}};
  }
  std::vector<LambdaOptimum> best(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), config.workers, [&](int i) {
    ProblemConfig problem = config.problem;
    problem.mu_b = jobs[i].second;
    best[i] = optimal_lambda(jobs[i].first, problem, config.solver);
  });
  out << "method,mu_b,lambda,prediction_error\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out << to_string(jobs[i].first) << ',' << fmt(jobs[i].second) << ',' << fmt(best[i].lambda) << ','
        << fmt(best[i].prediction_error) << '\n';
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ensel: asymptotic theory and simulation of ensemble variable selection"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::optional<std::string> config_path, out_path, method, lambda_grid, rho_grid, threshold_grid;
  std::optional<double> alpha, rho, delta, lambda, mu_b, pi_th, z_th, dko_pi_th, damping, tol;
  std::optional<int> max_iter, n, repeats, realizations, workers;
  std::optional<std::uint64_t> seed;
  std::string theory_path, empirical_path;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file (flags override it)");
    sub->add_option("--out", out_path, "Output file (default: stdout)");
    sub->add_option("--workers", workers, "Worker threads for independent units");
  };
  const auto problem = [&](CLI::App* sub) {
    sub->add_option("--alpha", alpha, "Sample ratio M/N");
    sub->add_option("--rho", rho, "Fraction of nonzero coefficients");
    sub->add_option("--delta", delta, "Noise variance");
    sub->add_option("--mu-b", mu_b, "Bootstrap rate (stability selection)");
    sub->add_option("--lambda", lambda, "Regularization strength");
    sub->add_option("--lambda-grid", lambda_grid, "Lambda grid: a,b,c | lin:lo:hi:n | log:lo:hi:n");
  };
  const auto thresholds = [&](CLI::App* sub) {
    sub->add_option("--pi-th", pi_th, "Selection-probability threshold");
    sub->add_option("--z-th", z_th, "Knockoff statistic threshold");
  };
  const auto solver = [&](CLI::App* sub) {
    sub->add_option("--damping", damping, "Fixed-point damping in (0, 1]");
    sub->add_option("--tol", tol, "Fixed-point sup-norm tolerance");
    sub->add_option("--max-iter", max_iter, "Fixed-point iteration cap");
  };
  const auto method_opt = [&](CLI::App* sub, const std::string& help) {
    sub->add_option("--method", method, help);
  };

  auto* solve = app.add_subcommand("solve", "Solve the self-consistent equations over a lambda grid");
  common(solve), problem(solve), thresholds(solve), solver(solve);
  method_opt(solve, "ss | dko | lasso");

  auto* power = app.add_subcommand("power-curve", "FDR/TPR curve at the prediction-optimal lambda");
  common(power), problem(power), thresholds(power), solver(power);
  method_opt(power, "ss | dko | ko | lasso");
  power->add_option("--threshold-grid", threshold_grid, "Sweep grid (pi_th, z_th or lambda)");
  power->add_option("--dko-pi-th", dko_pi_th, "Fixed pi_th along dKO curves");

  auto* phase = app.add_subcommand("phase-boundary", "Perfect-reconstruction boundaries");
  common(phase);
  phase->add_option("--rho-grid", rho_grid, "Sparsity grid");

  auto* simulate = app.add_subcommand("simulate", "Finite-size Monte Carlo experiment");
  common(simulate), problem(simulate), thresholds(simulate);
  method_opt(simulate, "ss | dko | ko | lasso");
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--n", n, "Number of parameters N");
  simulate->add_option("--repeats", repeats, "Bootstrap or knockoff draws per dataset");
  simulate->add_option("--realizations", realizations, "Independent datasets");

  auto* compare = app.add_subcommand("compare", "Theory vs experiment verdict table");
  common(compare);
  compare->add_option("--theory", theory_path, "CSV from solve")->required();
  compare->add_option("--empirical", empirical_path, "JSON from simulate")->required();

  auto* lambda_opt = app.add_subcommand("lambda-opt", "Prediction-error-optimal lambda");
  common(lambda_opt), problem(lambda_opt), solver(lambda_opt);
  method_opt(lambda_opt, "ss | dko | ko | lasso (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig config;
  std::ostringstream buffer;
  std::ostringstream log;
  int code = kExitOk;
  try {
    if (config_path) apply_config_file(*config_path, config);
    if (method) {
      try {
        config.method = parse_method(*method);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      config.method_given = true;
    }
    if (alpha) config.problem.alpha = *alpha;
    if (rho) config.problem.rho = *rho;
    if (delta) config.problem.delta = *delta;
    if (mu_b) config.problem.mu_b = *mu_b;
    if (lambda) {
      config.problem.lambda = *lambda;
      config.lambda_grid.clear();
      config.lambda_given = true;
    }
    if (lambda_grid) {
      config.lambda_grid = parse_grid(*lambda_grid);
      config.lambda_given = true;
    }
    if (pi_th) config.thresholds.pi_th = *pi_th;
    if (z_th) config.thresholds.z_th = *z_th;
    if (dko_pi_th) config.dko_pi_th = *dko_pi_th;
    if (damping) config.solver.damping = *damping;
    if (tol) config.solver.tol = *tol;
    if (max_iter) config.solver.max_iter = *max_iter;
    if (threshold_grid) config.threshold_grid = parse_grid(*threshold_grid);
    if (rho_grid) config.rho_grid = parse_grid(*rho_grid);
    if (n) config.n = *n;
    if (repeats) config.repeats = *repeats;
    if (realizations) config.realizations = *realizations;
    if (seed) config.seed = *seed;
    if (workers) config.workers = *workers;
    if (out_path) config.out = *out_path;
    config.theory_path = theory_path;
    config.empirical_path = empirical_path;
    config.validate();

    if (*solve) {
      config.command = "solve";
      code = cmd_solve(config, buffer);
    } else if (*power) {
      config.command = "power-curve";
      code = cmd_power_curve(config, buffer, log);
    } else if (*phase) {
      config.command = "phase-boundary";
      code = cmd_phase_boundary(config, buffer);
    } else if (*simulate) {
      config.command = "simulate";
      code = cmd_simulate(config, buffer);
    } else if (*compare) {
      config.command = "compare";
      code = cmd_compare(config, buffer, log);
    } else {
      config.command = "lambda-opt";
      code = cmd_lambda_opt(config, buffer);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  err << log.str();
  if (config.out.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(config.out, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << config.out << "'\n";
      return kExitUsage;
    }
    file << buffer.str();
  }
  if (code == kExitNumerical) err << "numerical failure: some grid points did not converge\n";
  return code;
}

}  // namespace ensel
