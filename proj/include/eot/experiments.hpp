#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eot/cost.hpp"
#include "eot/measure.hpp"

namespace eot {

enum class Setting { cube, surface, semidiscrete, sinkhorn_divergence };
enum class Estimator { two_sample, one_sample };

const char* setting_name(Setting s);
Setting setting_from_name(const std::string& name);
const char* cost_name(CostKind k);
CostKind cost_from_name(const std::string& name);

// One Monte Carlo study: for every (eps, n) cell draw `reps` independent
// sample estimates of the transport value, compare against a population value
// estimated once per eps from `pop_reps` solves at size pop_n, and record the
// absolute deviations whose decay in n is the object of interest.
struct ExperimentConfig {
  Setting setting = Setting::cube;
  int d1 = 5;                      // first intrinsic dimension (atoms for semidiscrete)
  int d2 = 5;                      // second intrinsic dimension
  CostKind cost = CostKind::sq_euclidean;
  bool normalize = true;           // divide the cost by max(d1, d2)
  std::vector<double> eps_list{1.0};
  std::vector<int> n_grid;         // filled by default_config when empty
  int reps = 200;                  // Monte Carlo repetitions per (eps, n) cell
  int pop_n = 6000;                // sample size of the population solves
  int pop_reps = 20;               // population solves averaged per eps
  Estimator estimator = Estimator::two_sample;
  std::uint64_t master_seed = 20260815;
  double marginal_tol = 1e-8;
  long max_iters = 1000000;
  int threads = 0;                 // 0 = hardware concurrency
  bool timing = false;             // when set, per-record wall_ms is measured
};

// Per-setting defaults (grids, costs, estimator pairing).
ExperimentConfig default_config(Setting s);

// Strict JSON loader: starts from default_config of the "setting" key, then
// applies overrides; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

// Throws eot::error (bad_config) when fields are inconsistent with the
// setting (estimator pairing, cost family, dimension constraints).
void validate_config(const ExperimentConfig& cfg);

struct RunRecord {
  double eps = 0.0;
  int n = 0;
  int rep = 0;
  double estimate = 0.0;
  double abs_dev = 0.0;
  long iterations = 0;
  double wall_ms = 0.0;
  bool converged = false;
  double pot_var = 0.0;  // weighted variance of the two potentials, summed
};

struct PopulationValue {
  double eps = 0.0;
  double value = 0.0;  // NaN when every population solve failed
  int used_reps = 0;
  int failed_reps = 0;
};

struct CellSummary {
  double eps = 0.0;
  int n = 0;
  int reps = 0;
  int failures = 0;
  double mean_abs_dev = 0.0;    // over converged repetitions
  double stderr_abs_dev = 0.0;  // sample sd / sqrt(k)
  double mean_iterations = 0.0;
  double mean_pot_var = 0.0;
  bool valid = false;  // false when failures exceed 5% or the population failed
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<PopulationValue> populations;  // one per eps
  std::vector<RunRecord> records;            // ordered by (eps index, n index, rep)
  std::vector<CellSummary> cells;            // ordered by (eps index, n index)
  double total_wall_ms = 0.0;
};

// Runs populations first, then every (eps, n, rep) task. Each task derives its
// own random streams from the master seed, so results are byte-reproducible
// and independent of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Pinned CSV schema:
// setting,d1,d2,eps,n,rep,estimate,abs_dev,iterations,wall_ms,converged
std::string csv_to_string(const ExperimentResult& result);
std::vector<RunRecord> records_from_csv(const std::string& text, std::string* setting = nullptr,
                                        int* d1 = nullptr, int* d2 = nullptr);
std::string manifest_to_json(const ExperimentResult& result);

struct MeanDev {
  double mean = 0.0;
  double stderr_mean = 0.0;  // 0 for a single observation
};
MeanDev mean_abs_dev(const std::vector<double>& deviations);

struct RateFit {
  double slope = 0.0;      // exponent of the fitted power law
  double intercept = 0.0;  // log-scale intercept
  double r_squared = 0.0;  // coefficient of determination of the log-log fit
};

// Least squares on (log n, log delta). Throws degenerate_fit when fewer than
// two distinct sizes remain or any deviation is not strictly positive.
RateFit rate_fit(const std::vector<double>& ns, const std::vector<double>& deltas);

}  // namespace eot
