#include "eot/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "eot/error.hpp"
#include "eot/rng.hpp"
#include "eot/sinkhorn.hpp"

namespace eot {

const char* setting_name(Setting s) {
  switch (s) {
    case Setting::cube: return "cube";
    case Setting::surface: return "surface";
    case Setting::semidiscrete: return "semidiscrete";
    case Setting::sinkhorn_divergence: return "sinkhorn_divergence";
  }
  fail(errc::bad_config, "unknown setting");
}

Setting setting_from_name(const std::string& name) {
  if (name == "cube") return Setting::cube;
  if (name == "surface") return Setting::surface;
  if (name == "semidiscrete") return Setting::semidiscrete;
  if (name == "sinkhorn_divergence") return Setting::sinkhorn_divergence;
  fail(errc::bad_config, "unknown setting: " + name);
}

const char* cost_name(CostKind k) {
  switch (k) {
    case CostKind::sq_euclidean: return "sq_euclidean";
    case CostKind::l1: return "l1";
    case CostKind::l_inf: return "l_inf";
    case CostKind::gw_bilinear: return "gw_bilinear";
    case CostKind::decomposable: return "decomposable";
  }
  fail(errc::bad_config, "unknown cost kind");
}

CostKind cost_from_name(const std::string& name) {
  if (name == "sq_euclidean") return CostKind::sq_euclidean;
  if (name == "l1") return CostKind::l1;
  if (name == "l_inf") return CostKind::l_inf;
  fail(errc::bad_config, "unknown cost for experiments: " + name);
}

ExperimentConfig default_config(Setting s) {
  ExperimentConfig cfg;
  cfg.setting = s;
  switch (s) {
    case Setting::cube:
      cfg.d1 = 5;
      cfg.d2 = 5;
      cfg.cost = CostKind::sq_euclidean;
      cfg.normalize = true;
      cfg.estimator = Estimator::two_sample;
      cfg.pop_n = 6000;
      break;
    case Setting::surface:
      cfg.d1 = 7;
      cfg.d2 = 5;
      cfg.cost = CostKind::sq_euclidean;
      cfg.normalize = true;
      cfg.estimator = Estimator::two_sample;
      cfg.pop_n = 6000;
      break;
    case Setting::semidiscrete:
      cfg.d1 = 10;  // atoms of the fixed discrete marginal
      cfg.d2 = 10;  // ambient dimension of the continuous marginal
      cfg.cost = CostKind::l_inf;
      cfg.normalize = false;
      cfg.estimator = Estimator::one_sample;
      cfg.pop_n = 20000;
      break;
    case Setting::sinkhorn_divergence:
      cfg.d1 = 5;
      cfg.d2 = 5;
      cfg.cost = CostKind::sq_euclidean;
      cfg.normalize = true;
      cfg.estimator = Estimator::two_sample;
      cfg.pop_n = 6000;
      break;
  }
  const int hi = s == Setting::semidiscrete ? 2000 : 1000;
  cfg.n_grid.clear();
  for (int n = 100; n <= hi; n += 100) cfg.n_grid.push_back(n);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  require(cfg.d1 >= 1 && cfg.d2 >= 1, errc::bad_config, "config: need d1, d2 >= 1");
  require(!cfg.eps_list.empty(), errc::bad_config, "config: eps_list is empty");
  for (double e : cfg.eps_list)
    require(e > 0.0 && std::isfinite(e), errc::nonpositive_eps, "config: eps must be > 0");
  require(!cfg.n_grid.empty(), errc::bad_config, "config: n_grid is empty");
  for (int n : cfg.n_grid) require(n >= 1, errc::bad_config, "config: sample sizes must be >= 1");
  for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
    require(cfg.n_grid[i - 1] < cfg.n_grid[i], errc::bad_config, "config: n_grid must ascend");
  require(cfg.reps >= 1 && cfg.pop_n >= 1 && cfg.pop_reps >= 1, errc::bad_config,
          "config: reps, pop_n, pop_reps must be >= 1");
  require(cfg.marginal_tol > 0.0, errc::bad_config, "config: marginal_tol must be > 0");
  require(cfg.max_iters >= 1, errc::bad_config, "config: max_iters must be >= 1");
  require(cfg.threads >= 0, errc::bad_config, "config: threads must be >= 0");

  switch (cfg.setting) {
    case Setting::cube:
      require(cfg.estimator == Estimator::two_sample, errc::bad_config,
              "cube: estimator must be two_sample");
      require(cfg.cost == CostKind::sq_euclidean || cfg.cost == CostKind::l1, errc::bad_config,
              "cube: cost must be sq_euclidean or l1");
      break;
    case Setting::surface:
      require(cfg.estimator == Estimator::two_sample, errc::bad_config,
              "surface: estimator must be two_sample");
      require(cfg.cost == CostKind::sq_euclidean, errc::bad_config,
              "surface: cost must be sq_euclidean");
      require(cfg.d1 >= cfg.d2, errc::bad_config,
              "surface: d1 is the ambient dimension and must be >= d2");
      require(cfg.d1 - cfg.d2 <= cfg.d2, errc::bad_config,
              "surface: curvature directions d1 - d2 cannot exceed d2");
      break;
    case Setting::semidiscrete:
      require(cfg.estimator == Estimator::one_sample, errc::bad_config,
              "semidiscrete: estimator must be one_sample");
      require(cfg.cost == CostKind::l_inf, errc::bad_config, "semidiscrete: cost must be l_inf");
      require(!cfg.normalize, errc::bad_config, "semidiscrete: cost is not normalized");
      break;
    case Setting::sinkhorn_divergence:
      require(cfg.estimator == Estimator::two_sample, errc::bad_config,
              "sinkhorn_divergence: estimator must be two_sample");
      require(cfg.cost == CostKind::sq_euclidean, errc::bad_config,
              "sinkhorn_divergence: cost must be sq_euclidean");
      break;
  }
  if (cfg.cost == CostKind::l_inf)
    require(!cfg.normalize, errc::bad_config, "config: l_inf cost is never normalized");
}

namespace {

using nlohmann::ordered_json;

const char* estimator_name(Estimator e) {
  return e == Estimator::two_sample ? "two_sample" : "one_sample";
}

Estimator estimator_from_name(const std::string& name) {
  if (name == "two_sample") return Estimator::two_sample;
  if (name == "one_sample") return Estimator::one_sample;
  fail(errc::bad_config, "unknown estimator: " + name);
}

uint64_t setting_tag(Setting s) {
  switch (s) {
    case Setting::cube: return 1;
    case Setting::surface: return 2;
    case Setting::semidiscrete: return 3;
    case Setting::sinkhorn_divergence: return 4;
  }
  fail(errc::bad_config, "unknown setting");
}

CostSpec make_cost(const ExperimentConfig& cfg) {
  const double scale =
      cfg.normalize ? 1.0 / static_cast<double>(std::max(cfg.d1, cfg.d2)) : 1.0;
  switch (cfg.cost) {
    case CostKind::sq_euclidean: return sq_euclidean(scale);
    case CostKind::l1: return l1_cost(scale);
    case CostKind::l_inf: return linf_cost();
    default: fail(errc::bad_config, "unsupported experiment cost");
  }
}

double weighted_variance(const Eigen::VectorXd& f, const Eigen::VectorXd& w) {
  const double m = w.dot(f);
  return (w.array() * (f.array() - m).square()).sum();
}

struct TaskOutcome {
  double estimate = 0.0;
  long iterations = 0;
  bool converged = false;
  double pot_var = 0.0;
};

TaskOutcome solve_task(const ExperimentConfig& cfg, const Measure& mu, const Measure& nu,
                       const CostSpec& spec, double eps) {
  SinkhornConfig s;
  s.eps = eps;
  s.marginal_tol = cfg.marginal_tol;
  s.max_iters = cfg.max_iters;
  TaskOutcome out;
  if (cfg.setting == Setting::sinkhorn_divergence) {
    const DivergenceResult r = sinkhorn_divergence(mu, nu, spec, s);
    out.estimate = r.value;
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.pot_var = weighted_variance(r.cross.potentials.phi, mu.weights) +
                  weighted_variance(r.cross.potentials.psi, nu.weights);
  } else {
    const EotSolution r = sinkhorn_solve(mu, nu, spec, s);
    out.estimate = r.dual_value;
    out.iterations = r.iterations;
    out.converged = r.converged;
    out.pot_var = weighted_variance(r.potentials.phi, mu.weights) +
                  weighted_variance(r.potentials.psi, nu.weights);
  }
  return out;
}

// Draws the marginal pair of one task. The fixed semidiscrete support is
// passed in; only the continuous side is resampled.
void draw_measures(const ExperimentConfig& cfg, const Measure* fixed_mu, int n, uint64_t seed_mu,
                   uint64_t seed_nu, Measure& mu, Measure& nu) {
  switch (cfg.setting) {
    case Setting::cube:
    case Setting::sinkhorn_divergence: {
      const int D = std::max(cfg.d1, cfg.d2);
      mu = sample_cube(cfg.d1, D, n, seed_mu);
      nu = sample_cube(cfg.d2, D, n, seed_nu);
      return;
    }
    case Setting::surface: {
      const int k = cfg.d1 - cfg.d2;
      mu = sample_surface(SurfaceKind::T, cfg.d2, k, n, seed_mu);
      nu = sample_surface(SurfaceKind::S, cfg.d2, k, n, seed_nu);
      return;
    }
    case Setting::semidiscrete: {
      mu = *fixed_mu;
      nu = sample_cube(cfg.d2, cfg.d2, n, seed_nu);
      return;
    }
  }
  fail(errc::bad_config, "unknown setting");
}

void parallel_for(int nthreads, std::size_t count, const std::function<void(std::size_t)>& fn) {
  if (nthreads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::size_t>(count, nthreads));
  pool.reserve(spawn);
  for (int t = 0; t < spawn; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const double t_start = now_ms();

  ExperimentResult result;
  result.config = cfg;
  const uint64_t base = mix_seed(cfg.master_seed, setting_tag(cfg.setting));
  const CostSpec spec = make_cost(cfg);
  const int nthreads = cfg.threads > 0
                           ? cfg.threads
                           : std::max(1u, std::thread::hardware_concurrency());

  Measure fixed_mu;
  const Measure* fixed_ptr = nullptr;
  if (cfg.setting == Setting::semidiscrete) {
    fixed_mu = fixed_discrete_support(cfg.d1, cfg.d2, mix_seed(base, 0xA11));
    fixed_ptr = &fixed_mu;
  }

  const std::size_t E = cfg.eps_list.size();
  const std::size_t N = cfg.n_grid.size();
  const std::size_t R = static_cast<std::size_t>(cfg.reps);

  // Population pass: pop_reps independent large solves per eps.
  std::vector<TaskOutcome> pop_raw(E * static_cast<std::size_t>(cfg.pop_reps));
  parallel_for(nthreads, pop_raw.size(), [&](std::size_t id) {
    const std::size_t e = id / static_cast<std::size_t>(cfg.pop_reps);
    const std::size_t r = id % static_cast<std::size_t>(cfg.pop_reps);
    const uint64_t task = mix_seed(mix_seed(base, 2000 + e), r);
    Measure mu, nu;
    draw_measures(cfg, fixed_ptr, cfg.pop_n, mix_seed(task, 0), mix_seed(task, 1), mu, nu);
    pop_raw[id] = solve_task(cfg, mu, nu, spec, cfg.eps_list[e]);
  });
  result.populations.resize(E);
  for (std::size_t e = 0; e < E; ++e) {
    PopulationValue& pv = result.populations[e];
    pv.eps = cfg.eps_list[e];
    double sum = 0.0;
    for (int r = 0; r < cfg.pop_reps; ++r) {
      const TaskOutcome& o = pop_raw[e * cfg.pop_reps + r];
      if (o.converged) {
        sum += o.estimate;
        ++pv.used_reps;
      } else {
        ++pv.failed_reps;
      }
    }
    pv.value = pv.used_reps > 0 ? sum / pv.used_reps
                                : std::numeric_limits<double>::quiet_NaN();
  }

  // Monte Carlo grid: reps independent estimates per (eps, n) cell.
  result.records.resize(E * N * R);
  parallel_for(nthreads, result.records.size(), [&](std::size_t id) {
    const std::size_t e = id / (N * R);
    const std::size_t ni = (id / R) % N;
    const std::size_t rep = id % R;
    const int n = cfg.n_grid[ni];
    const uint64_t task =
        mix_seed(mix_seed(mix_seed(base, 1000 + e), static_cast<uint64_t>(n)), rep);
    const double t0 = cfg.timing ? now_ms() : 0.0;
    Measure mu, nu;
    draw_measures(cfg, fixed_ptr, n, mix_seed(task, 0), mix_seed(task, 1), mu, nu);
    const TaskOutcome o = solve_task(cfg, mu, nu, spec, cfg.eps_list[e]);
    RunRecord& rec = result.records[id];
    rec.eps = cfg.eps_list[e];
    rec.n = n;
    rec.rep = static_cast<int>(rep);
    rec.estimate = o.estimate;
    rec.abs_dev = std::abs(o.estimate - result.populations[e].value);
    rec.iterations = o.iterations;
    rec.wall_ms = cfg.timing ? now_ms() - t0 : 0.0;
    rec.converged = o.converged;
    rec.pot_var = o.pot_var;
  });

  result.cells.reserve(E * N);
  for (std::size_t e = 0; e < E; ++e) {
    for (std::size_t ni = 0; ni < N; ++ni) {
      CellSummary cell;
      cell.eps = cfg.eps_list[e];
      cell.n = cfg.n_grid[ni];
      cell.reps = cfg.reps;
      std::vector<double> devs;
      devs.reserve(R);
      double iter_sum = 0.0, pv_sum = 0.0;
      for (std::size_t rep = 0; rep < R; ++rep) {
        const RunRecord& rec = result.records[(e * N + ni) * R + rep];
        iter_sum += static_cast<double>(rec.iterations);
        if (rec.converged) {
          devs.push_back(rec.abs_dev);
          pv_sum += rec.pot_var;
        } else {
          ++cell.failures;
        }
      }
      cell.mean_iterations = iter_sum / static_cast<double>(R);
      if (!devs.empty()) {
        const MeanDev md = mean_abs_dev(devs);
        cell.mean_abs_dev = md.mean;
        cell.stderr_abs_dev = md.stderr_mean;
        cell.mean_pot_var = pv_sum / static_cast<double>(devs.size());
      } else {
        cell.mean_abs_dev = std::numeric_limits<double>::quiet_NaN();
        cell.stderr_abs_dev = std::numeric_limits<double>::quiet_NaN();
        cell.mean_pot_var = std::numeric_limits<double>::quiet_NaN();
      }
      cell.valid = cell.failures * 20 <= cfg.reps && result.populations[e].used_reps > 0 &&
                   std::isfinite(cell.mean_abs_dev);
      result.cells.push_back(cell);
    }
  }

  result.total_wall_ms = now_ms() - t_start;
  return result;
}

std::string csv_to_string(const ExperimentResult& result) {
  std::string out = "setting,d1,d2,eps,n,rep,estimate,abs_dev,iterations,wall_ms,converged\n";
  char buf[512];
  for (const RunRecord& rec : result.records) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%.17g,%d,%d,%.17g,%.17g,%ld,%.17g,%d\n",
                  setting_name(result.config.setting), result.config.d1, result.config.d2,
                  rec.eps, rec.n, rec.rep, rec.estimate, rec.abs_dev, rec.iterations, rec.wall_ms,
                  rec.converged ? 1 : 0);
    out += buf;
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

double parse_double_field(const std::string& s, std::size_t lineno, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end == s.c_str() + s.size() && !s.empty(), errc::parse_error,
          "csv line " + std::to_string(lineno) + ": bad " + what + " '" + s + "'");
  return v;
}

long parse_long_field(const std::string& s, std::size_t lineno, const char* what) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  require(end == s.c_str() + s.size() && !s.empty(), errc::parse_error,
          "csv line " + std::to_string(lineno) + ": bad " + what + " '" + s + "'");
  return v;
}

}  // namespace

std::vector<RunRecord> records_from_csv(const std::string& text, std::string* setting, int* d1,
                                        int* d2) {
  std::vector<RunRecord> rows;
  std::size_t start = 0, lineno = 0;
  std::string first_setting;
  int first_d1 = 0, first_d2 = 0;
  bool saw_header = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    if (!saw_header) {
      require(line == "setting,d1,d2,eps,n,rep,estimate,abs_dev,iterations,wall_ms,converged",
              errc::parse_error, "csv line 1: unexpected header");
      saw_header = true;
      continue;
    }
    const std::vector<std::string> f = split_csv_line(line);
    require(f.size() == 11, errc::parse_error,
            "csv line " + std::to_string(lineno) + ": expected 11 fields, got " +
                std::to_string(f.size()));
    if (rows.empty()) {
      first_setting = f[0];
      first_d1 = static_cast<int>(parse_long_field(f[1], lineno, "d1"));
      first_d2 = static_cast<int>(parse_long_field(f[2], lineno, "d2"));
    } else {
      require(f[0] == first_setting, errc::parse_error,
              "csv line " + std::to_string(lineno) + ": mixed settings in one file");
    }
    RunRecord r;
    r.eps = parse_double_field(f[3], lineno, "eps");
    r.n = static_cast<int>(parse_long_field(f[4], lineno, "n"));
    r.rep = static_cast<int>(parse_long_field(f[5], lineno, "rep"));
    r.estimate = parse_double_field(f[6], lineno, "estimate");
    r.abs_dev = parse_double_field(f[7], lineno, "abs_dev");
    r.iterations = parse_long_field(f[8], lineno, "iterations");
    r.wall_ms = parse_double_field(f[9], lineno, "wall_ms");
    const long conv = parse_long_field(f[10], lineno, "converged");
    require(conv == 0 || conv == 1, errc::parse_error,
            "csv line " + std::to_string(lineno) + ": converged must be 0 or 1");
    r.converged = conv == 1;
    rows.push_back(r);
  }
  require(saw_header, errc::parse_error, "csv: missing header");
  if (setting) *setting = first_setting;
  if (d1) *d1 = first_d1;
  if (d2) *d2 = first_d2;
  return rows;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["setting"] = setting_name(cfg.setting);
  j["d1"] = cfg.d1;
  j["d2"] = cfg.d2;
  j["cost"] = cost_name(cfg.cost);
  j["normalize"] = cfg.normalize;
  j["eps_list"] = cfg.eps_list;
  j["n_grid"] = cfg.n_grid;
  j["reps"] = cfg.reps;
  j["pop_n"] = cfg.pop_n;
  j["pop_reps"] = cfg.pop_reps;
  j["estimator"] = estimator_name(cfg.estimator);
  j["master_seed"] = cfg.master_seed;
  j["marginal_tol"] = cfg.marginal_tol;
  j["max_iters"] = cfg.max_iters;
  j["threads"] = cfg.threads;
  j["timing"] = cfg.timing;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(errc::parse_error, std::string("config: invalid json: ") + e.what());
  }
  require(j.is_object(), errc::bad_config, "config: top level must be a json object");
  require(j.contains("setting") && j["setting"].is_string(), errc::bad_config,
          "config: missing string key 'setting'");
  ExperimentConfig cfg = default_config(setting_from_name(j["setting"].get<std::string>()));
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "setting") continue;
      else if (key == "d1") cfg.d1 = value.get<int>();
      else if (key == "d2") cfg.d2 = value.get<int>();
      else if (key == "cost") cfg.cost = cost_from_name(value.get<std::string>());
      else if (key == "normalize") cfg.normalize = value.get<bool>();
      else if (key == "eps_list") cfg.eps_list = value.get<std::vector<double>>();
      else if (key == "n_grid") cfg.n_grid = value.get<std::vector<int>>();
      else if (key == "reps") cfg.reps = value.get<int>();
      else if (key == "pop_n") cfg.pop_n = value.get<int>();
      else if (key == "pop_reps") cfg.pop_reps = value.get<int>();
      else if (key == "estimator") cfg.estimator = estimator_from_name(value.get<std::string>());
      else if (key == "master_seed" || key == "seed") cfg.master_seed = value.get<uint64_t>();
      else if (key == "marginal_tol") cfg.marginal_tol = value.get<double>();
      else if (key == "max_iters") cfg.max_iters = value.get<long>();
      else if (key == "threads") cfg.threads = value.get<int>();
      else if (key == "timing") cfg.timing = value.get<bool>();
      else fail(errc::bad_config, "config: unknown key '" + key + "'");
    }
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    fail(errc::bad_config, std::string("config: bad value type: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

std::string manifest_to_json(const ExperimentResult& result) {
  ordered_json j;
  j["artifact_version"] = 1;
  j["config"] = ordered_json::parse(config_to_json(result.config));
  j["master_seed"] = result.config.master_seed;
  j["record_count"] = result.records.size();
  j["total_wall_ms"] = result.total_wall_ms;
  ordered_json pops = ordered_json::array();
  for (const PopulationValue& pv : result.populations) {
    ordered_json p;
    p["eps"] = pv.eps;
    p["value"] = pv.value;
    p["used_reps"] = pv.used_reps;
    p["failed_reps"] = pv.failed_reps;
    pops.push_back(p);
  }
  j["populations"] = pops;
  ordered_json cells = ordered_json::array();
  ordered_json invalid = ordered_json::array();
  for (const CellSummary& c : result.cells) {
    ordered_json jc;
    jc["eps"] = c.eps;
    jc["n"] = c.n;
    jc["reps"] = c.reps;
    jc["failures"] = c.failures;
    jc["mean_abs_dev"] = c.mean_abs_dev;
    jc["stderr_abs_dev"] = c.stderr_abs_dev;
    jc["mean_iterations"] = c.mean_iterations;
    jc["mean_pot_var"] = c.mean_pot_var;
    jc["valid"] = c.valid;
    cells.push_back(jc);
    if (!c.valid) {
      ordered_json bad;
      bad["eps"] = c.eps;
      bad["n"] = c.n;
      invalid.push_back(bad);
    }
  }
  j["cells"] = cells;
  j["invalid_cells"] = invalid;
  return j.dump(2);
}

MeanDev mean_abs_dev(const std::vector<double>& deviations) {
  require(!deviations.empty(), errc::bad_config, "mean_abs_dev: no observations");
  MeanDev out;
  const double k = static_cast<double>(deviations.size());
  double sum = 0.0;
  for (double d : deviations) sum += d;
  out.mean = sum / k;
  if (deviations.size() == 1) {
    out.stderr_mean = 0.0;
    return out;
  }
  double ss = 0.0;
  for (double d : deviations) ss += (d - out.mean) * (d - out.mean);
  out.stderr_mean = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  return out;
}

RateFit rate_fit(const std::vector<double>& ns, const std::vector<double>& deltas) {
  require(ns.size() == deltas.size(), errc::degenerate_fit, "rate_fit: length mismatch");
  require(ns.size() >= 2, errc::degenerate_fit, "rate_fit: need at least two points");
  std::vector<double> xs(ns.size()), ys(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    require(ns[i] > 0.0 && std::isfinite(ns[i]), errc::degenerate_fit,
            "rate_fit: sizes must be positive");
    require(deltas[i] > 0.0 && std::isfinite(deltas[i]), errc::degenerate_fit,
            "rate_fit: deviations must be strictly positive");
    xs[i] = std::log(ns[i]);
    ys[i] = std::log(deltas[i]);
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(xs.size());
  ybar /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  require(sxx > 0.0, errc::degenerate_fit, "rate_fit: all sizes identical");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double syy = 0.0, sres = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    syy += (ys[i] - ybar) * (ys[i] - ybar);
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sres += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sres / syy : 1.0;
  return fit;
}

}  // namespace eot
