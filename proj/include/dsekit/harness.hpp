#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsekit/filters.hpp"
#include "dsekit/grid.hpp"
#include "dsekit/scenarios.hpp"

namespace dsekit {

struct armse_result {
  std::vector<double> per_step;
  double scalar = 0.0;
};

// Root-mean-square error per step, pooled over trials and channels:
// per_step[t] = sqrt( sum_trials |err_col_t|^2 / (channels * trials) );
// scalar = mean over steps. Every error matrix must have the same shape
// (channels x steps).
armse_result armse(const std::vector<Eigen::MatrixXd>& per_trial_errors);

struct experiment_config {
  scenario_spec scenario;
  std::vector<std::string> filter_names;
  std::vector<filter_config> filters;
  int trials = 0;   // 0: scenario default
  int horizon = 0;  // 0: scenario default
  std::uint64_t master_seed = 1;
  int jobs = 1;
  Eigen::MatrixXd initial_cov;  // empty: 1e-2 I
};

struct filter_run_summary {
  std::string name;
  std::vector<double> armse_magnitude, armse_phase;  // per step
  double scalar_magnitude = 0.0, scalar_phase = 0.0;
  double convergence_rate = 1.0;  // fraction of measurement updates converged
  double fallback_rate = 0.0;     // fraction resolved by the smallest-step fallback
  double runtime_seconds = 0.0;   // excluded from byte-compared artifacts
};

struct experiment_report {
  std::vector<filter_run_summary> filters;
  int trials_requested = 0;
  int trials_used = 0;
  std::vector<int> excluded_trials;       // paired exclusion, all filters
  std::vector<std::string> trial_hashes;  // hex content hash per trial
  double generation_seconds = 0.0;        // sidecar timing only
};

struct experiment_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Paired Monte-Carlo comparison: every filter consumes bit-identical
// measurement data per trial. A trial on which any filter fails is excluded
// for all filters; more than 10% exclusions aborts with experiment_error.
// Aggregation is a deterministic reduction in trial order, so the report is
// byte-stable for any worker count.
experiment_report run_experiment(const grid_model& model,
                                 const experiment_config& cfg);
// Single-threaded reference implementation with identical output bytes.
experiment_report run_experiment_serial(const grid_model& model,
                                        const experiment_config& cfg);

// Comparison table rows (header + one row per filter, sorted ascending by
// phase ARMSE). Improvement is (baseline - candidate) / baseline against the
// next-worse filter.
std::vector<std::vector<std::string>> comparison_rows(
    const experiment_report& report);

struct tuning_config {
  filter_variant variant = filter_variant::ckmmc_ukf;
  int agents = 30;
  int iterations = 500;
  std::uint64_t seed = 0;
  int fit_trials = 10;
  int fit_horizon = 30;
  std::uint64_t fit_master_seed = 424242;  // basis of the fixed seed list
  Eigen::VectorXd lower, upper;            // packed bounds; empty: defaults
};

// Default coefficient box per variant: alpha in [0.5, 2], beta in [0, 3],
// kernel sizes in [0.1, 20].
void default_tuning_bounds(filter_variant v, Eigen::VectorXd& lower,
                           Eigen::VectorXd& upper);

// Reduced-fidelity fitting objective: magnitude + phase scalar ARMSE over the
// fixed trial seeds; any filter failure returns the penalty 1e6. Candidates
// outside the bounds are rejected with an exception.
double tuning_objective(const grid_model& model, const scenario_spec& scenario,
                        const Eigen::VectorXd& coefficients,
                        const tuning_config& cfg);

struct tuning_result {
  Eigen::VectorXd coefficients;
  double objective = 0.0;
  double default_objective = 0.0;
  std::vector<double> history;
  long evaluations = 0;
};

// Swarm search over the coefficient box, warm-started at the reference
// defaults so the tuned objective can never exceed the default one.
tuning_result tune_coefficients(const grid_model& model,
                                const scenario_spec& scenario,
                                const tuning_config& cfg);

}  // namespace dsekit
