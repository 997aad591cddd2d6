#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eot/artifacts.hpp"
#include "eot/error.hpp"
#include "eot/experiments.hpp"
#include "eot/gaussian.hpp"
#include "eot/gromov.hpp"
#include "eot/io.hpp"
#include "eot/sinkhorn.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  eot::require(in.good(), eot::errc::parse_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& what) {
  eot::require(j.is_array(), eot::errc::parse_error, what + " must be a json array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto& e = j[static_cast<std::size_t>(i)];
    eot::require(e.is_number(), eot::errc::parse_error, what + " must contain numbers");
    v[i] = e.get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what) {
  eot::require(j.is_array() && !j.empty(), eot::errc::parse_error,
               what + " must be a nonempty array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd row =
        vector_from_json(j[static_cast<std::size_t>(i)], what + " row");
    if (i == 0) m.resize(rows, row.size());
    eot::require(row.size() == m.cols(), eot::errc::parse_error, what + " rows differ in length");
    m.row(i) = row.transpose();
  }
  return m;
}

eot::CostSpec cost_from_cli(const std::string& name, double scale) {
  const eot::CostKind kind = eot::cost_from_name(name);
  switch (kind) {
    case eot::CostKind::sq_euclidean: return eot::sq_euclidean(scale);
    case eot::CostKind::l1: return eot::l1_cost(scale);
    case eot::CostKind::l_inf:
      eot::require(scale == 1.0, eot::errc::bad_config, "l_inf cost takes no scale");
      return eot::linf_cost();
    default: eot::fail(eot::errc::bad_config, "unsupported cost: " + name);
  }
}

struct SolveArgs {
  std::string mu_path, nu_path, cost = "sq_euclidean";
  double scale = 1.0, eps = 1.0, tol = 1e-8;
  long max_iters = 1000000;
  bool json = false, divergence = false;
};

int run_solve(const SolveArgs& a) {
  const eot::Measure mu = eot::read_measure(a.mu_path);
  const eot::Measure nu = eot::read_measure(a.nu_path);
  const eot::CostSpec spec = cost_from_cli(a.cost, a.scale);
  eot::SinkhornConfig cfg;
  cfg.eps = a.eps;
  cfg.marginal_tol = a.tol;
  cfg.max_iters = a.max_iters;

  double cost_sup = 0.0;
  const bool small = mu.size() <= eot::kCostCacheBudget / nu.size();
  if (small) {
    const Eigen::MatrixXd C = eot::cost_matrix(spec, mu.points, nu.points);
    cost_sup = C.cwiseAbs().maxCoeff();
  }

  if (a.divergence) {
    const eot::DivergenceResult r = eot::sinkhorn_divergence(mu, nu, spec, cfg);
    if (a.json) {
      nlohmann::ordered_json j;
      j["divergence"] = r.value;
      j["cross_dual"] = r.cross.dual_value;
      j["iterations"] = r.iterations;
      j["converged"] = r.converged;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "sinkhorn divergence: " << fmt(r.value) << "\n"
                << "cross dual value:    " << fmt(r.cross.dual_value) << "\n"
                << "iterations (total):  " << r.iterations << "\n"
                << "converged:           " << (r.converged ? "yes" : "no") << "\n";
    }
    return r.converged ? kExitOk : kExitNotConverged;
  }

  const eot::EotSolution sol = eot::sinkhorn_solve(mu, nu, spec, cfg);
  if (a.json) {
    nlohmann::ordered_json j;
    j["dual_value"] = sol.dual_value;
    j["primal_value"] = sol.primal_value;
    j["duality_gap"] = sol.primal_value - sol.dual_value;
    j["iterations"] = sol.iterations;
    j["marginal_err_mu"] = sol.marginal_err_mu;
    j["marginal_err_nu"] = sol.marginal_err_nu;
    j["converged"] = sol.converged;
    if (small)
      j["iteration_budget_hint"] =
          eot::sinkhorn_iteration_budget(std::max(mu.size(), nu.size()), cost_sup, a.eps, a.tol);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "dual value:      " << fmt(sol.dual_value) << "\n"
              << "primal value:    " << fmt(sol.primal_value) << "\n"
              << "duality gap:     " << fmt(sol.primal_value - sol.dual_value, "%.3g") << "\n"
              << "iterations:      " << sol.iterations << " pairs\n";
    if (small)
      std::cout << "budget hint:     "
                << eot::sinkhorn_iteration_budget(std::max(mu.size(), nu.size()), cost_sup, a.eps,
                                                  a.tol)
                << " pairs (worst case)\n";
    std::cout << "marginal errors: mu " << fmt(sol.marginal_err_mu, "%.3g") << ", nu "
              << fmt(sol.marginal_err_nu, "%.3g") << "\n"
              << "converged:       " << (sol.converged ? "yes" : "no") << "\n";
  }
  return sol.converged ? kExitOk : kExitNotConverged;
}

struct GaussianArgs {
  std::string params_path;
  double eps = 1.0;
  bool json = false;
};

int run_gaussian(const GaussianArgs& a) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(a.params_path));
  } catch (const eot::error&) {
    throw;
  } catch (const std::exception& e) {
    eot::fail(eot::errc::parse_error, std::string("gaussian params: invalid json: ") + e.what());
  }
  for (const char* key : {"mean1", "cov1", "mean2", "cov2"})
    eot::require(j.contains(key), eot::errc::parse_error,
                 std::string("gaussian params: missing key '") + key + "'");
  const Eigen::VectorXd m1 = vector_from_json(j["mean1"], "mean1");
  const Eigen::MatrixXd S1 = matrix_from_json(j["cov1"], "cov1");
  const Eigen::VectorXd m2 = vector_from_json(j["mean2"], "mean2");
  const Eigen::MatrixXd S2 = matrix_from_json(j["cov2"], "cov2");
  const double bures = eot::bures_eps(S1, S2, a.eps);
  const double value = (m1 - m2).squaredNorm() + bures;
  if (a.json) {
    nlohmann::ordered_json out;
    out["value"] = value;
    out["mean_part"] = (m1 - m2).squaredNorm();
    out["covariance_part"] = bures;
    out["eps"] = a.eps;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "gaussian transport value: " << fmt(value) << "\n"
              << "  mean part:              " << fmt((m1 - m2).squaredNorm()) << "\n"
              << "  covariance part:        " << fmt(bures) << "\n";
  }
  return kExitOk;
}

struct GwArgs {
  std::string mu_path, nu_path;
  double eps = 1.0, outer_tol = 1e-7, inner_tol = 1e-10;
  int max_outer = 200, restarts = 1;
  std::uint64_t seed = 0;
  bool json = false, trace = false;
};

int run_gw(const GwArgs& a) {
  const eot::Measure mu = eot::read_measure(a.mu_path);
  const eot::Measure nu = eot::read_measure(a.nu_path);
  eot::GwConfig cfg;
  cfg.eps = a.eps;
  cfg.outer_tol = a.outer_tol;
  cfg.max_outer = a.max_outer;
  cfg.restarts = a.restarts;
  cfg.seed = a.seed;
  cfg.inner.marginal_tol = a.inner_tol;
  const eot::GwSolution sol = eot::entropic_gw(mu, nu, cfg);
  if (a.json) {
    nlohmann::ordered_json j;
    j["value"] = sol.value;
    j["marginal_part"] = sol.marginal_part;
    j["coupled_part"] = sol.coupled_part;
    j["outer_iters"] = sol.outer_iters;
    j["converged"] = sol.converged;
    if (a.trace) j["objective_trace"] = sol.objective_trace;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "gromov transport value: " << fmt(sol.value) << "\n"
              << "  marginal part:        " << fmt(sol.marginal_part) << "\n"
              << "  coupled part:         " << fmt(sol.coupled_part) << "\n"
              << "  outer iterations:     " << sol.outer_iters << "\n"
              << "  converged:            " << (sol.converged ? "yes" : "no") << "\n";
    if (a.trace) {
      std::cout << "  objective trace:\n";
      for (double v : sol.objective_trace) std::cout << "    " << fmt(v, "%.12g") << "\n";
    }
  }
  return sol.converged ? kExitOk : kExitNotConverged;
}

struct ExperimentArgs {
  std::string config_path, out_prefix = "experiment";
  std::uint64_t seed = 0;
  int reps = -1, threads = -1;
  double tol = -1.0;
  bool timing = false, have_seed = false;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  eot::ExperimentConfig cfg = eot::config_from_json(slurp(a.config_path));
  if (a.have_seed) cfg.master_seed = a.seed;
  if (a.reps >= 1) cfg.reps = a.reps;
  if (a.threads >= 0) cfg.threads = a.threads;
  if (a.tol > 0.0) cfg.marginal_tol = a.tol;
  if (a.timing) cfg.timing = true;
  eot::validate_config(cfg);

  const eot::ExperimentResult result = eot::run_experiment(cfg);
  eot::atomic_write_file(a.out_prefix + ".csv", eot::csv_to_string(result));
  eot::atomic_write_file(a.out_prefix + ".manifest.json", eot::manifest_to_json(result));

  std::cout << "setting=" << eot::setting_name(cfg.setting) << " d1=" << cfg.d1
            << " d2=" << cfg.d2 << " cost=" << eot::cost_name(cfg.cost)
            << " normalize=" << (cfg.normalize ? 1 : 0) << " reps=" << cfg.reps << "\n";
  for (const eot::PopulationValue& pv : result.populations)
    std::cout << "population eps=" << fmt(pv.eps) << ": value=" << fmt(pv.value, "%.12g")
              << " (used " << pv.used_reps << "/" << pv.used_reps + pv.failed_reps << ")\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-6s %-12s %-12s %-11s %-12s %-5s", "eps", "n",
                "mean_dev", "stderr", "mean_iters", "pot_var", "fail");
  std::cout << line << "\n";
  for (const eot::CellSummary& c : result.cells) {
    std::snprintf(line, sizeof line, "%-10.4g %-6d %-12.5g %-12.4g %-11.1f %-12.5g %-5d%s", c.eps,
                  c.n, c.mean_abs_dev, c.stderr_abs_dev, c.mean_iterations, c.mean_pot_var,
                  c.failures, c.valid ? "" : "  [invalid]");
    std::cout << line << "\n";
  }
  std::cout << "wrote " << a.out_prefix << ".csv (" << result.records.size() << " records), "
            << a.out_prefix << ".manifest.json\n";
  return kExitOk;
}

struct PlotArgs {
  std::vector<std::string> csv_paths;
  std::string out_path, title = "empirical deviation vs sample size";
};

int run_plot(const PlotArgs& a) {
  std::vector<eot::PlotSeries> series;
  for (const std::string& path : a.csv_paths) {
    std::string setting;
    int d1 = 0, d2 = 0;
    const std::vector<eot::RunRecord> rows =
        eot::records_from_csv(slurp(path), &setting, &d1, &d2);
    eot::require(!rows.empty(), eot::errc::parse_error, path + ": no records");

    std::map<double, std::map<int, std::vector<double>>> grouped;
    for (const eot::RunRecord& r : rows)
      if (r.converged) grouped[r.eps][r.n].push_back(r.abs_dev);
    for (const auto& [eps, by_n] : grouped) {
      eot::PlotSeries s;
      s.label = setting + " d1=" + std::to_string(d1) + " d2=" + std::to_string(d2) +
                " eps=" + fmt(eps, "%.4g");
      if (a.csv_paths.size() > 1) s.label += " [" + path + "]";
      for (const auto& [n, devs] : by_n) {
        s.ns.push_back(static_cast<double>(n));
        s.deltas.push_back(eot::mean_abs_dev(devs).mean);
      }
      try {
        const eot::RateFit fit = eot::rate_fit(s.ns, s.deltas);
        s.fitted_slope = fit.slope;
        s.has_fit = true;
      } catch (const eot::error& e) {
        if (e.code != eot::errc::degenerate_fit) throw;
      }
      series.push_back(std::move(s));
    }
  }
  eot::atomic_write_file(a.out_path, eot::svg_rate_plot(series, a.title));
  std::cout << "wrote " << a.out_path << " (" << series.size() << " series)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "entropic optimal transport toolkit: discrete solver, Gaussian closed form,\n"
      "Gromov discrepancy, and Monte Carlo convergence experiments.\n"
      "Measure files list one atom per line as: weight x_1 ... x_d ('#' comments)."};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "solve one discrete transport problem");
  solve->add_option("--mu", solve_args.mu_path, "first marginal file")->required();
  solve->add_option("--nu", solve_args.nu_path, "second marginal file")->required();
  solve->add_option("--cost", solve_args.cost, "sq_euclidean | l1 | l_inf");
  solve->add_option("--scale", solve_args.scale, "multiplier applied to the cost");
  solve->add_option("--eps", solve_args.eps, "entropic regularization (> 0)");
  solve->add_option("--tol", solve_args.tol, "marginal total-variation tolerance");
  solve->add_option("--max-iters", solve_args.max_iters, "iteration pair budget");
  solve->add_flag("--divergence", solve_args.divergence,
                  "report the debiased divergence instead of the plain value");
  solve->add_flag("--json", solve_args.json, "machine-readable output");

  GaussianArgs gaussian_args;
  CLI::App* gaussian =
      app.add_subcommand("gaussian", "closed-form value between two Gaussians");
  gaussian->add_option("--params", gaussian_args.params_path,
                       "json file with mean1, cov1, mean2, cov2")
      ->required();
  gaussian->add_option("--eps", gaussian_args.eps, "entropic regularization (> 0)")->required();
  gaussian->add_flag("--json", gaussian_args.json, "machine-readable output");

  GwArgs gw_args;
  CLI::App* gw = app.add_subcommand("gw", "entropic Gromov discrepancy between two measures");
  gw->add_option("--mu", gw_args.mu_path, "first marginal file")->required();
  gw->add_option("--nu", gw_args.nu_path, "second marginal file")->required();
  gw->add_option("--eps", gw_args.eps, "entropic regularization (> 0)");
  gw->add_option("--outer-tol", gw_args.outer_tol, "outer objective stall tolerance");
  gw->add_option("--inner-tol", gw_args.inner_tol, "inner marginal tolerance");
  gw->add_option("--max-outer", gw_args.max_outer, "outer iteration budget");
  gw->add_option("--gw-restarts,--restarts", gw_args.restarts,
                 "randomized restarts (first starts at zero)");
  gw->add_option("--seed", gw_args.seed, "seed for randomized restarts");
  gw->add_flag("--trace", gw_args.trace, "print the outer objective trace");
  gw->add_flag("--json", gw_args.json, "machine-readable output");

  ExperimentArgs exp_args;
  CLI::App* experiment =
      app.add_subcommand("experiment", "run a Monte Carlo convergence study");
  experiment->add_option("--config", exp_args.config_path, "json experiment config")->required();
  experiment->add_option("--out", exp_args.out_prefix, "output prefix (default: experiment)");
  CLI::Option* seed_opt =
      experiment->add_option("--seed", exp_args.seed, "override the master seed");
  experiment->add_option("--reps", exp_args.reps, "override repetitions per cell")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--threads", exp_args.threads, "worker threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  experiment->add_option("--tol", exp_args.tol, "override the marginal tolerance")
      ->check(CLI::PositiveNumber);
  experiment->add_flag("--timing", exp_args.timing, "measure per-record wall time");

  PlotArgs plot_args;
  CLI::App* plot = app.add_subcommand("plot", "render deviation curves from experiment csv files");
  plot->add_option("csv", plot_args.csv_paths, "experiment csv files")->required();
  plot->add_option("--out", plot_args.out_path, "output svg path")->required();
  plot->add_option("--title", plot_args.title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    exp_args.have_seed = seed_opt->count() > 0;
    if (solve->parsed()) return run_solve(solve_args);
    if (gaussian->parsed()) return run_gaussian(gaussian_args);
    if (gw->parsed()) return run_gw(gw_args);
    if (experiment->parsed()) return run_experiment_cmd(exp_args);
    if (plot->parsed()) return run_plot(plot_args);
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const eot::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitUnexpected;
  }
}
