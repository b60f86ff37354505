#include "dsekit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dsekit/metaheuristics.hpp"
#include "dsekit/report.hpp"

namespace dsekit {

armse_result armse(const std::vector<Eigen::MatrixXd>& per_trial_errors) {
  if (per_trial_errors.empty())
    throw std::invalid_argument("need at least one trial");
  const auto rows = per_trial_errors.front().rows();
  const auto cols = per_trial_errors.front().cols();
  if (rows == 0 || cols == 0) throw std::invalid_argument("empty error matrix");
  for (const auto& e : per_trial_errors)
    if (e.rows() != rows || e.cols() != cols)
      throw std::invalid_argument("error matrices disagree in shape");

  armse_result out;
  out.per_step.resize(static_cast<std::size_t>(cols));
  const double denom =
      static_cast<double>(rows) * static_cast<double>(per_trial_errors.size());
  double total = 0.0;
  for (Eigen::Index t = 0; t < cols; ++t) {
    double s = 0.0;
    for (const auto& e : per_trial_errors) s += e.col(t).squaredNorm();
    const double v = std::sqrt(s / denom);
    out.per_step[static_cast<std::size_t>(t)] = v;
    total += v;
  }
  out.scalar = total / static_cast<double>(cols);
  return out;
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct trial_outcome {
  bool ok = false;
  std::string hash = "excluded";
  double gen_seconds = 0.0;
  // Per filter, committed only when every filter succeeded on this trial.
  std::vector<Eigen::MatrixXd> errors;  // state_dim x horizon
  std::vector<long> converged, fallbacks, updates;
  std::vector<double> runtime;
};

struct resolved_config {
  scenario_spec scenario;
  int trials = 0;
  Eigen::MatrixXd p0;
};

resolved_config resolve(const grid_model& model, const experiment_config& cfg) {
  if (cfg.filters.empty() || cfg.filters.size() != cfg.filter_names.size())
    throw std::invalid_argument("filter list and name list must match and be non-empty");
  resolved_config rc;
  rc.scenario = cfg.scenario;
  if (cfg.horizon > 0) rc.scenario.horizon = cfg.horizon;
  rc.trials = cfg.trials > 0 ? cfg.trials : rc.scenario.default_trials;
  if (rc.trials < 1) throw std::invalid_argument("need at least one trial");
  rc.p0 = cfg.initial_cov.size() > 0
              ? cfg.initial_cov
              : Eigen::MatrixXd(1e-2 * Eigen::MatrixXd::Identity(
                                    model.state_dim(), model.state_dim()));
  return rc;
}

trial_outcome run_one_trial(const grid_model& model,
                            const experiment_config& cfg,
                            const resolved_config& rc,
                            const measurement_model& meas, int trial_index) {
  trial_outcome out;
  const auto gen_start = clock_type::now();
  trial_data data;
  try {
    data = generate_trial(model, rc.scenario, cfg.master_seed, trial_index);
  } catch (const trial_error&) {
    return out;
  }
  out.gen_seconds = seconds_since(gen_start);
  out.hash = hex64(data.content_hash);

  const int horizon = rc.scenario.horizon;
  const std::size_t nf = cfg.filters.size();
  out.errors.resize(nf);
  out.converged.assign(nf, 0);
  out.fallbacks.assign(nf, 0);
  out.updates.assign(nf, 0);
  out.runtime.assign(nf, 0.0);
  const Eigen::VectorXd x0 = data.truth.col(0);

  for (std::size_t f = 0; f < nf; ++f) {
    const auto start = clock_type::now();
    std::vector<step_record> records;
    try {
      records = run_filter(meas, cfg.filters[f], x0, rc.p0, data.measurements);
    } catch (const filter_divergence&) {
      return out;  // paired exclusion of the whole trial
    }
    out.runtime[f] = seconds_since(start);
    Eigen::MatrixXd err(model.state_dim(), horizon);
    for (int t = 0; t < horizon; ++t) {
      err.col(t) = records[static_cast<std::size_t>(t)].x - data.truth.col(t + 1);
      const auto& d = records[static_cast<std::size_t>(t)].diag;
      out.converged[f] += d.converged ? 1 : 0;
      out.fallbacks[f] += d.fallback ? 1 : 0;
      ++out.updates[f];
    }
    out.errors[f] = std::move(err);
  }

  // Paired-data discipline: the shared trial data must come out of the filter
  // runs bit-identical to how it went in.
  std::uint64_t h = fnv1a64(data.truth.data(), sizeof(double) * data.truth.size());
  h = fnv1a64(data.measurements.data(), sizeof(double) * data.measurements.size(), h);
  if (hex64(h) != out.hash)
    throw std::logic_error("trial data mutated during filtering");

  out.ok = true;
  return out;
}

experiment_report reduce_outcomes(const grid_model& model,
                                  const experiment_config& cfg,
                                  const resolved_config& rc,
                                  std::vector<trial_outcome>& outcomes) {
  const int buses = model.bus_count();
  const int horizon = rc.scenario.horizon;
  const std::size_t nf = cfg.filters.size();

  experiment_report rep;
  rep.trials_requested = rc.trials;
  for (int k = 0; k < rc.trials; ++k) {
    rep.trial_hashes.push_back(outcomes[static_cast<std::size_t>(k)].hash);
    if (!outcomes[static_cast<std::size_t>(k)].ok) rep.excluded_trials.push_back(k);
  }
  rep.trials_used = rc.trials - static_cast<int>(rep.excluded_trials.size());
  if (rep.trials_used < rc.trials &&
      static_cast<double>(rep.excluded_trials.size()) > 0.1 * rc.trials)
    throw experiment_error(
        "more than 10% of trials failed (" +
        std::to_string(rep.excluded_trials.size()) + " of " +
        std::to_string(rc.trials) + ")");
  if (rep.trials_used == 0) throw experiment_error("all trials failed");

  const int phase_rows = buses - 1;
  const int mag_rows = buses;
  for (std::size_t f = 0; f < nf; ++f) {
    filter_run_summary s;
    s.name = cfg.filter_names[f];
    std::vector<double> mag_sq(static_cast<std::size_t>(horizon), 0.0);
    std::vector<double> phase_sq(static_cast<std::size_t>(horizon), 0.0);
    long converged = 0, fallbacks = 0, updates = 0;
    for (int k = 0; k < rc.trials; ++k) {
      const auto& oc = outcomes[static_cast<std::size_t>(k)];
      if (!oc.ok) continue;
      const Eigen::MatrixXd& err = oc.errors[f];
      for (int t = 0; t < horizon; ++t) {
        phase_sq[static_cast<std::size_t>(t)] +=
            err.col(t).head(phase_rows).squaredNorm();
        mag_sq[static_cast<std::size_t>(t)] +=
            err.col(t).tail(mag_rows).squaredNorm();
      }
      converged += oc.converged[f];
      fallbacks += oc.fallbacks[f];
      updates += oc.updates[f];
      s.runtime_seconds += oc.runtime[f];
    }
    s.armse_magnitude.resize(static_cast<std::size_t>(horizon));
    s.armse_phase.resize(static_cast<std::size_t>(horizon));
    double mag_total = 0.0, phase_total = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const double mv = std::sqrt(mag_sq[static_cast<std::size_t>(t)] /
                                  (static_cast<double>(mag_rows) * rep.trials_used));
      const double pv = std::sqrt(phase_sq[static_cast<std::size_t>(t)] /
                                  (static_cast<double>(phase_rows) * rep.trials_used));
      s.armse_magnitude[static_cast<std::size_t>(t)] = mv;
      s.armse_phase[static_cast<std::size_t>(t)] = pv;
      mag_total += mv;
      phase_total += pv;
    }
    s.scalar_magnitude = mag_total / horizon;
    s.scalar_phase = phase_total / horizon;
    s.convergence_rate = updates > 0 ? static_cast<double>(converged) / updates : 1.0;
    s.fallback_rate = updates > 0 ? static_cast<double>(fallbacks) / updates : 0.0;
    rep.filters.push_back(std::move(s));
  }
  for (const auto& oc : outcomes) rep.generation_seconds += oc.gen_seconds;
  return rep;
}

measurement_model model_interface(const grid_model& model) {
  measurement_model m;
  m.state_dim = model.state_dim();
  m.meas_dim = model.meas_dim();
  m.h = [&model](const Eigen::VectorXd& x) { return model.measure(x); };
  m.jacobian = [&model](const Eigen::VectorXd& x) {
    return model.measurement_jacobian(x);
  };
  return m;
}

}  // namespace

experiment_report run_experiment(const grid_model& model,
                                 const experiment_config& cfg) {
  const resolved_config rc = resolve(model, cfg);
  const measurement_model meas = model_interface(model);
  std::vector<trial_outcome> outcomes(static_cast<std::size_t>(rc.trials));

#ifdef _OPENMP
  // Exceptions must not cross the parallel region boundary; anything a trial
  // throws beyond the handled exclusion cases is collected and rethrown as an
  // experiment failure afterwards.
  bool failed = false;
  std::string first_error;
  const int jobs = cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int k = 0; k < rc.trials; ++k) {
    try {
      outcomes[static_cast<std::size_t>(k)] =
          run_one_trial(model, cfg, rc, meas, k);
    } catch (const std::exception& e) {
#pragma omp critical(dsekit_experiment_failure)
      {
        if (!failed) {
          failed = true;
          first_error = e.what();
        }
      }
    } catch (...) {
#pragma omp critical(dsekit_experiment_failure)
      {
        if (!failed) {
          failed = true;
          first_error = "unknown trial failure";
        }
      }
    }
  }
  if (failed) throw experiment_error(first_error);
#else
  for (int k = 0; k < rc.trials; ++k)
    outcomes[static_cast<std::size_t>(k)] =
        run_one_trial(model, cfg, rc, meas, k);
#endif

  return reduce_outcomes(model, cfg, rc, outcomes);
}

experiment_report run_experiment_serial(const grid_model& model,
                                        const experiment_config& cfg) {
  const resolved_config rc = resolve(model, cfg);
  const measurement_model meas = model_interface(model);
  std::vector<trial_outcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(rc.trials));
  for (int k = 0; k < rc.trials; ++k)
    outcomes.push_back(run_one_trial(model, cfg, rc, meas, k));
  return reduce_outcomes(model, cfg, rc, outcomes);
}

std::vector<std::vector<std::string>> comparison_rows(
    const experiment_report& report) {
  std::vector<const filter_run_summary*> order;
  for (const auto& f : report.filters) order.push_back(&f);
  std::stable_sort(order.begin(), order.end(),
                   [](const filter_run_summary* a, const filter_run_summary* b) {
                     return a->scalar_phase < b->scalar_phase;
                   });
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"filter", "phase_armse", "magnitude_armse",
                  "improvement_vs_next_pct"});
  for (std::size_t i = 0; i < order.size(); ++i) {
    double improvement = 0.0;
    if (i + 1 < order.size() && order[i + 1]->scalar_phase > 0.0)
      improvement = 100.0 * (order[i + 1]->scalar_phase - order[i]->scalar_phase) /
                    order[i + 1]->scalar_phase;
    rows.push_back({order[i]->name, format_double(order[i]->scalar_phase),
                    format_double(order[i]->scalar_magnitude),
                    format_double(improvement)});
  }
  return rows;
}

void default_tuning_bounds(filter_variant v, Eigen::VectorXd& lower,
                           Eigen::VectorXd& upper) {
  int kernels = 0;
  switch (v) {
    case filter_variant::ekf:
    case filter_variant::ukf:
      kernels = 0;
      break;
    case filter_variant::mcc_ukf:
    case filter_variant::ckmc_ukf:
      kernels = 1;
      break;
    case filter_variant::ckmmc_ukf:
      kernels = 2;
      break;
  }
  lower.resize(2 + kernels);
  upper.resize(2 + kernels);
  // Spread factors below 0.5 push the center covariance weight deep negative,
  // a regime where propagated covariances stop being reliably positive.
  lower[0] = 0.5;
  upper[0] = 2.0;
  lower[1] = 0.0;
  upper[1] = 3.0;
  for (int j = 0; j < kernels; ++j) {
    lower[2 + j] = 0.1;
    upper[2 + j] = 20.0;
  }
}

double tuning_objective(const grid_model& model, const scenario_spec& scenario,
                        const Eigen::VectorXd& coefficients,
                        const tuning_config& cfg) {
  Eigen::VectorXd lower = cfg.lower, upper = cfg.upper;
  if (lower.size() == 0) default_tuning_bounds(cfg.variant, lower, upper);
  if (coefficients.size() != lower.size())
    throw std::invalid_argument("coefficient vector size mismatch");
  for (int j = 0; j < coefficients.size(); ++j)
    if (coefficients[j] < lower[j] || coefficients[j] > upper[j])
      throw std::invalid_argument("candidate outside the coefficient bounds");

  filter_config fc =
      filter_config::defaults_for(cfg.variant, model.state_dim(), model.meas_dim());
  fc.apply_coefficients(coefficients);

  experiment_config ec;
  ec.scenario = scenario;
  ec.filter_names = {variant_name(cfg.variant)};
  ec.filters = {fc};
  ec.trials = cfg.fit_trials;
  ec.horizon = cfg.fit_horizon;
  ec.master_seed = cfg.fit_master_seed;
  ec.jobs = 1;
  try {
    const experiment_report rep = run_experiment_serial(model, ec);
    if (!rep.excluded_trials.empty()) return 1e6;
    return rep.filters[0].scalar_magnitude + rep.filters[0].scalar_phase;
  } catch (const experiment_error&) {
    return 1e6;
  } catch (const std::runtime_error&) {
    return 1e6;
  }
}

tuning_result tune_coefficients(const grid_model& model,
                                const scenario_spec& scenario,
                                const tuning_config& cfg) {
  tuning_config resolved = cfg;
  if (resolved.lower.size() == 0)
    default_tuning_bounds(resolved.variant, resolved.lower, resolved.upper);
  const Eigen::VectorXd defaults =
      filter_config::defaults_for(resolved.variant, model.state_dim(),
                                  model.meas_dim())
          .coefficients();

  const objective_fn f = [&](const Eigen::VectorXd& c) {
    return tuning_objective(model, scenario, c, resolved);
  };
  optimizer_config oc;
  oc.agents = resolved.agents;
  oc.iterations = resolved.iterations;
  oc.seed = resolved.seed;
  oc.warm_start = defaults;
  const optimizer_result best = run_bwb(f, resolved.lower, resolved.upper, oc);

  tuning_result out;
  out.coefficients = best.best;
  out.objective = best.best_value;
  out.default_objective = tuning_objective(model, scenario, defaults, resolved);
  out.history = best.history;
  out.evaluations = best.evaluations;
  return out;
}

}  // namespace dsekit
