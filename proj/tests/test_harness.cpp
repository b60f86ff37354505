#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dsekit/filters.hpp"
#include "dsekit/grid.hpp"
#include "dsekit/harness.hpp"
#include "dsekit/report.hpp"
#include "dsekit/scenarios.hpp"

using dsekit::armse;
using dsekit::experiment_config;
using dsekit::experiment_error;
using dsekit::experiment_report;
using dsekit::filter_config;
using dsekit::filter_variant;
using dsekit::grid_model;
using dsekit::noise_model;
using dsekit::run_experiment;
using dsekit::run_experiment_serial;
using dsekit::scenario_spec;

namespace {

grid_model make_model() {
  dsekit::bus_system sys =
      dsekit::bus_system::from_file(dsekit::resolve_case_path("ieee14"));
  dsekit::measurement_plan plan = dsekit::measurement_plan::full(sys);
  return grid_model(std::move(sys), std::move(plan));
}

scenario_spec quiet_scenario(int horizon, int trials) {
  scenario_spec s;
  s.name = "quiet";
  s.process = noise_model::gaussian(0.0, 1e-6);
  s.measurement = noise_model::gaussian(0.0, 1e-4);
  s.horizon = horizon;
  s.default_trials = trials;
  return s;
}

experiment_config small_config(const grid_model& model,
                               std::vector<std::string> names, int trials,
                               int horizon, std::uint64_t seed) {
  experiment_config cfg;
  cfg.scenario = quiet_scenario(horizon, trials);
  for (const auto& name : names) {
    cfg.filter_names.push_back(name);
    cfg.filters.push_back(filter_config::defaults_for(
        dsekit::variant_from_name(name), model.state_dim(), model.meas_dim()));
  }
  cfg.trials = trials;
  cfg.horizon = horizon;
  cfg.master_seed = seed;
  return cfg;
}

std::string joined_rows(const experiment_report& rep) {
  return dsekit::csv_join(dsekit::comparison_rows(rep));
}

}  // namespace

TEST_CASE("pooled error aggregation matches the frozen toy example") {
  Eigen::MatrixXd t0(2, 2), t1(2, 2);
  t0 << 0.1, -0.1, -0.2, 0.1;
  t1 << 0.0, 0.2, 0.3, 0.2;
  const auto r = armse({t0, t1});
  REQUIRE(r.per_step.size() == 2);
  CHECK(r.per_step[0] == doctest::Approx(0.18708286933869708).epsilon(1e-15));
  CHECK(r.per_step[1] == doctest::Approx(0.15811388300841897).epsilon(1e-15));
  CHECK(r.scalar == doctest::Approx(0.17259837617355803).epsilon(1e-15));
}

TEST_CASE("single-channel aggregation reduces to the absolute error") {
  Eigen::MatrixXd e(1, 2);
  e << 0.1, -0.14142135623730951;
  const auto r = armse({e});
  CHECK(r.per_step[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(r.per_step[1] ==
        doctest::Approx(0.14142135623730951).epsilon(1e-15));
}

TEST_CASE("aggregation rejects malformed inputs") {
  CHECK_THROWS(armse({}));
  Eigen::MatrixXd a(2, 2), b(2, 3);
  a.setZero();
  b.setZero();
  CHECK_THROWS(armse({a, b}));
  CHECK_THROWS(armse({Eigen::MatrixXd()}));
}

TEST_CASE("a noiseless run started at the truth stays at the truth") {
  // The extended filter sees a zero innovation at the truth, so any error
  // here would expose a bias in generation, filtering, or bookkeeping. (The
  // sigma-point variants shift slightly on nonlinear models when the prior
  // covariance is wide; that is expected behavior, not drift.)
  const grid_model model = make_model();
  experiment_config cfg = small_config(model, {"ekf"}, 1, 10, 5);
  cfg.scenario.noise_scale = 0.0;
  const experiment_report rep = run_experiment_serial(model, cfg);
  REQUIRE(rep.filters.size() == 1);
  CHECK(rep.trials_used == 1);
  for (double v : rep.filters[0].armse_phase) CHECK(v < 1e-8);
  for (double v : rep.filters[0].armse_magnitude) CHECK(v < 1e-8);
  CHECK(rep.filters[0].convergence_rate == doctest::Approx(1.0));
  CHECK(rep.filters[0].fallback_rate == doctest::Approx(0.0));
}

TEST_CASE("parallel and serial runs produce identical formatted reports") {
  const grid_model model = make_model();
  experiment_config cfg = small_config(model, {"ukf", "ckmmc-ukf"}, 6, 8, 99);
  const experiment_report serial = run_experiment_serial(model, cfg);
  cfg.jobs = 4;
  const experiment_report parallel = run_experiment(model, cfg);
  cfg.jobs = 1;
  const experiment_report single = run_experiment(model, cfg);

  CHECK(joined_rows(serial) == joined_rows(parallel));
  CHECK(joined_rows(serial) == joined_rows(single));
  REQUIRE(serial.trial_hashes.size() == parallel.trial_hashes.size());
  for (std::size_t i = 0; i < serial.trial_hashes.size(); ++i)
    CHECK(serial.trial_hashes[i] == parallel.trial_hashes[i]);
  for (std::size_t f = 0; f < serial.filters.size(); ++f) {
    for (std::size_t t = 0; t < serial.filters[f].armse_phase.size(); ++t) {
      CHECK(serial.filters[f].armse_phase[t] ==
            parallel.filters[f].armse_phase[t]);
      CHECK(serial.filters[f].armse_magnitude[t] ==
            parallel.filters[f].armse_magnitude[t]);
    }
  }
}

TEST_CASE("trial hashes in the report match independent regeneration") {
  const grid_model model = make_model();
  experiment_config cfg = small_config(model, {"ukf"}, 3, 5, 31);
  const experiment_report rep = run_experiment_serial(model, cfg);
  REQUIRE(rep.trial_hashes.size() == 3);
  for (int k = 0; k < 3; ++k) {
    const auto data = dsekit::generate_trial(model, cfg.scenario, 31, k);
    CHECK(rep.trial_hashes[static_cast<std::size_t>(k)] ==
          dsekit::hex64(data.content_hash));
  }
}

TEST_CASE("scenario defaults fill in unset trial and horizon counts") {
  const grid_model model = make_model();
  experiment_config cfg = small_config(model, {"ukf"}, 2, 4, 7);
  cfg.trials = 0;   // fall back to scenario.default_trials = 2
  cfg.horizon = 0;  // fall back to scenario.horizon = 4
  const experiment_report rep = run_experiment_serial(model, cfg);
  CHECK(rep.trials_requested == 2);
  CHECK(rep.filters[0].armse_phase.size() == 4);
}

TEST_CASE("an impossible scenario fails every trial and aborts the run") {
  const grid_model model = make_model();
  experiment_config cfg = small_config(model, {"ukf"}, 4, 4, 11);
  cfg.scenario.events = {{dsekit::grid_event::kind::load_change, 1, 5, -1.0}};
  CHECK_THROWS_AS(run_experiment_serial(model, cfg), experiment_error);
}

TEST_CASE("scattered trial failures are excluded pairwise or abort the run") {
  // A process walk this violent occasionally drives a voltage magnitude
  // through zero, killing the trial for every filter. Scan master seeds for a
  // report with exactly one exclusion (allowed) and for a run that aborts
  // (more than 10% of trials lost).
  const grid_model model = make_model();
  bool found_partial = false, found_abort = false;
  for (std::uint64_t seed = 1; seed <= 60 && !(found_partial && found_abort);
       ++seed) {
    experiment_config cfg = small_config(model, {"ukf", "ckmc-ukf"}, 10, 5, seed);
    cfg.scenario.process = noise_model::gaussian(0.0, 0.04);
    try {
      const experiment_report rep = run_experiment_serial(model, cfg);
      if (rep.excluded_trials.size() == 1 && !found_partial) {
        found_partial = true;
        CHECK(rep.trials_used == 9);
        const int k = rep.excluded_trials[0];
        CHECK(rep.trial_hashes[static_cast<std::size_t>(k)] == "excluded");
        // Both filters aggregate over the same nine survivors.
        CHECK(rep.filters[0].armse_phase.size() == 5);
        CHECK(rep.filters[1].armse_phase.size() == 5);
      }
    } catch (const experiment_error&) {
      found_abort = true;
    }
  }
  CHECK(found_partial);
  CHECK(found_abort);
}

TEST_CASE("comparison rows sort ascending with pairwise improvements") {
  experiment_report rep;
  dsekit::filter_run_summary a, b, c;
  a.name = "alpha";
  a.scalar_phase = 0.02;
  a.scalar_magnitude = 0.2;
  b.name = "bravo";
  b.scalar_phase = 0.01;
  b.scalar_magnitude = 0.1;
  c.name = "charlie";
  c.scalar_phase = 0.04;
  c.scalar_magnitude = 0.4;
  rep.filters = {a, b, c};
  const auto rows = dsekit::comparison_rows(rep);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "filter");
  CHECK(rows[0][1] == "phase_armse");
  CHECK(rows[0][2] == "magnitude_armse");
  CHECK(rows[0][3] == "improvement_vs_next_pct");
  CHECK(rows[1][0] == "bravo");
  CHECK(rows[2][0] == "alpha");
  CHECK(rows[3][0] == "charlie");
  CHECK(rows[1][3] == dsekit::format_double(50.0));
  CHECK(rows[2][3] == dsekit::format_double(50.0));
  CHECK(rows[3][3] == dsekit::format_double(0.0));
}

TEST_CASE("the fitting objective rejects out-of-box candidates") {
  const grid_model model = make_model();
  dsekit::tuning_config tc;
  tc.variant = filter_variant::ukf;
  tc.fit_trials = 1;
  tc.fit_horizon = 3;
  Eigen::VectorXd bad(2);
  bad << 5.0, 0.1;  // spread outside [0.5, 2]
  CHECK_THROWS(dsekit::tuning_objective(model, quiet_scenario(3, 1), bad, tc));
  Eigen::VectorXd ok(2);
  ok << 1.0, 0.1;
  const double v = dsekit::tuning_objective(model, quiet_scenario(3, 1), ok, tc);
  CHECK(v > 0.0);
  CHECK(v < 1e6);
}

TEST_CASE("the fitting objective turns broken runs into a penalty") {
  const grid_model model = make_model();
  dsekit::tuning_config tc;
  tc.variant = filter_variant::ukf;
  tc.fit_trials = 2;
  tc.fit_horizon = 3;
  scenario_spec impossible = quiet_scenario(3, 2);
  impossible.events = {{dsekit::grid_event::kind::load_change, 1, 5, -1.0}};
  Eigen::VectorXd ok(2);
  ok << 1.0, 0.1;
  CHECK(dsekit::tuning_objective(model, impossible, ok, tc) == 1e6);
}

TEST_CASE("coefficient search never loses to the reference defaults") {
  const grid_model model = make_model();
  dsekit::tuning_config tc;
  tc.variant = filter_variant::ukf;
  tc.agents = 4;
  tc.iterations = 2;
  tc.seed = 1;
  tc.fit_trials = 2;
  tc.fit_horizon = 4;
  const dsekit::tuning_result res =
      dsekit::tune_coefficients(model, quiet_scenario(4, 2), tc);
  CHECK(res.objective <= res.default_objective);
  CHECK(res.coefficients.size() == 2);
  CHECK(res.evaluations > 0);
  REQUIRE(!res.history.empty());
  CHECK(res.history.back() == doctest::Approx(res.objective));
}
