#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsekit/grid.hpp"
#include "dsekit/rng.hpp"

namespace dsekit {

enum class noise_family { gaussian, laplace };

// One mixture component. `param` is the variance for a Gaussian component
// and the diversity (scale) parameter b for a Laplace component.
struct noise_component {
  double weight = 1.0;
  noise_family family = noise_family::gaussian;
  double mean = 0.0;
  double param = 1.0;
};

struct noise_model {
  std::vector<noise_component> components;

  void validate() const;
  double sample(rng& gen) const;
  double variance() const;  // exact second central moment

  static noise_model gaussian(double mean, double variance);
  static noise_model laplace(double mean, double scale);
};

struct grid_event {
  enum class kind { bad_data, load_change };
  kind type = kind::bad_data;
  int step = 0;    // 1-based time step the event fires at
  int bus = 0;     // bus label; load_change only
  double factor = 1.0;
};

// A full data-generation recipe: noise laws for the state random walk and the
// measurement channels, optional events, and default experiment sizes.
// noise_scale multiplies every drawn noise sample (a std-scale knob that
// leaves the law shapes untouched).
struct scenario_spec {
  std::string name = "custom";
  noise_model process;
  noise_model measurement;
  std::vector<grid_event> events;
  int horizon = 100;
  int default_trials = 200;
  double noise_scale = 1.0;

  static scenario_spec preset(int which);  // 1, 2, or 3
  // Accepts "1"/"2"/"3", "scenario1".., or a path to a JSON spec file.
  static scenario_spec from_name_or_file(const std::string& arg);

  nlohmann::json to_json() const;
  static scenario_spec from_json(const nlohmann::json& j);
};

struct trial_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct trial_data {
  Eigen::MatrixXd truth;         // n x (horizon+1); column 0 is the start state
  Eigen::MatrixXd measurements;  // m x horizon
  std::uint64_t content_hash = 0;
};

// Deterministic per-trial data: a state random walk from the solved start
// state plus noisy measurements of it, with events applied. Trial k under a
// given master seed sees the same bits no matter how trials are scheduled.
// Throws trial_error if any magnitude coordinate leaves (0, inf).
trial_data generate_trial(const grid_model& model, const scenario_spec& spec,
                          std::uint64_t master_seed, int trial_index);

}  // namespace dsekit
