#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dsekit {

using objective_fn = std::function<double(const Eigen::VectorXd&)>;

struct optimizer_config {
  int agents = 30;
  int iterations = 500;
  std::uint64_t seed = 0;
  double freq_min = 10.0;  // bat pulse frequency range
  double freq_max = 100.0;
  // When set, replaces agent 0's initial position (clamped to the box).
  std::optional<Eigen::VectorXd> warm_start;
};

struct optimizer_result {
  Eigen::VectorXd best;
  double best_value = 0.0;
  // Best value after initialization, then after each iteration.
  std::vector<double> history;
  long evaluations = 0;
};

// Hybrid swarm optimizer: permutation-based exploration, a bat-style velocity
// move, an adaptive pulse local search around the incumbent, and a
// reinitialization ("fall") kick. Greedy per-agent acceptance throughout.
optimizer_result run_bwb(const objective_fn& f, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         const optimizer_config& cfg);

// Baseline whale-style optimizer: same exploration and fall steps, with a
// Levy-flight-like exploitation pull toward the incumbent.
optimizer_result run_bwo(const objective_fn& f, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         const optimizer_config& cfg);

// Baseline particle swarm with the standard constriction-style constants.
optimizer_result run_pso(const objective_fn& f, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         const optimizer_config& cfg);

// Dispatch by name: "bwb", "bwo", or "pso".
optimizer_result run_optimizer(const std::string& name, const objective_fn& f,
                               const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper,
                               const optimizer_config& cfg);

}  // namespace dsekit
