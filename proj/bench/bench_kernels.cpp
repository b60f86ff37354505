#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "dsekit/filters.hpp"
#include "dsekit/grid.hpp"
#include "dsekit/harness.hpp"
#include "dsekit/scenarios.hpp"

namespace {

const dsekit::grid_model& model14() {
  static const dsekit::grid_model model = [] {
    dsekit::bus_system sys =
        dsekit::bus_system::from_file(dsekit::resolve_case_path("ieee14"));
    dsekit::measurement_plan plan = dsekit::measurement_plan::full(sys);
    return dsekit::grid_model(std::move(sys), std::move(plan));
  }();
  return model;
}

dsekit::experiment_config experiment(int trials, int horizon, int jobs) {
  const auto& model = model14();
  dsekit::experiment_config cfg;
  cfg.scenario = dsekit::scenario_spec::preset(1);
  cfg.trials = trials;
  cfg.horizon = horizon;
  cfg.master_seed = 1;
  cfg.jobs = jobs;
  cfg.filter_names = {"ukf", "ckmmc-ukf"};
  cfg.filters = {
      dsekit::filter_config::defaults_for(dsekit::filter_variant::ukf,
                                          model.state_dim(), model.meas_dim()),
      dsekit::filter_config::defaults_for(dsekit::filter_variant::ckmmc_ukf,
                                          model.state_dim(), model.meas_dim())};
  return cfg;
}

void bm_experiment_serial(benchmark::State& state) {
  const auto cfg = experiment(8, 25, 1);
  for (auto _ : state) {
    const auto rep = dsekit::run_experiment_serial(model14(), cfg);
    benchmark::DoNotOptimize(rep.filters[0].scalar_phase);
  }
}
BENCHMARK(bm_experiment_serial)->Unit(benchmark::kMillisecond);

void bm_experiment_parallel(benchmark::State& state) {
  const auto cfg = experiment(8, 25, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto rep = dsekit::run_experiment(model14(), cfg);
    benchmark::DoNotOptimize(rep.filters[0].scalar_phase);
  }
}
BENCHMARK(bm_experiment_parallel)->Arg(1)->Arg(2)->Arg(4)
    ->Unit(benchmark::kMillisecond);

void bm_measure(benchmark::State& state) {
  const auto& model = model14();
  const Eigen::VectorXd x = model.initial_state();
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.measure(x));
  }
}
BENCHMARK(bm_measure);

void bm_robust_update(benchmark::State& state) {
  const auto& model = model14();
  const int n = model.state_dim(), m = model.meas_dim();
  const auto cfg = dsekit::filter_config::defaults_for(
      dsekit::filter_variant::ckmmc_ukf, n, m);
  const dsekit::measurement_model mm{
      n, m, [&model](const Eigen::VectorXd& x) { return model.measure(x); },
      nullptr};
  const auto data =
      dsekit::generate_trial(model, dsekit::scenario_spec::preset(1), 1, 0);
  const Eigen::MatrixXd p0 = 1e-2 * Eigen::MatrixXd::Identity(n, n);
  for (auto _ : state) {
    auto st = dsekit::filter_state::init(data.truth.col(0), p0, cfg);
    dsekit::robust_step(st, mm, data.measurements.col(0), cfg);
    benchmark::DoNotOptimize(st.x);
  }
}
BENCHMARK(bm_robust_update);

}  // namespace

BENCHMARK_MAIN();
