#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsekit/benchmarks.hpp"
#include "dsekit/filters.hpp"
#include "dsekit/grid.hpp"
#include "dsekit/harness.hpp"
#include "dsekit/metaheuristics.hpp"
#include "dsekit/report.hpp"
#include "dsekit/rng.hpp"
#include "dsekit/scenarios.hpp"

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& arg) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(arg);
  while (std::getline(is, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_of(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

json timing_sidecar_stub() {
  return json::object();
}

// ---------------------------------------------------------------- estimate

json build_estimate_config(const std::string& case_arg,
                           const std::string& scenario_arg,
                           const std::string& filters_arg, int trials,
                           int horizon, std::uint64_t seed,
                           const std::string& coeffs_path,
                           const std::string& out_dir) {
  json cfg;
  cfg["case"] = dsekit::resolve_case_path(case_arg);
  cfg["case_alias"] = case_arg;
  const dsekit::scenario_spec scenario =
      dsekit::scenario_spec::from_name_or_file(scenario_arg);
  cfg["scenario"] = scenario.to_json();
  json names = json::array();
  json coeff_map = json::object();
  json user_coeffs = json::object();
  if (!coeffs_path.empty())
    user_coeffs = json::parse(dsekit::read_text_file(coeffs_path));
  for (const auto& name : split_list(filters_arg)) {
    const dsekit::filter_variant v = dsekit::variant_from_name(name);
    const std::string canon = dsekit::variant_name(v);
    names.push_back(canon);
    dsekit::filter_config fc = dsekit::filter_config::defaults_for(v, 1, 1);
    Eigen::VectorXd c = fc.coefficients();
    if (user_coeffs.contains(canon)) {
      const auto arr = user_coeffs.at(canon).get<std::vector<double>>();
      if (arr.size() != static_cast<std::size_t>(c.size()))
        throw std::invalid_argument("coefficient override for " + canon +
                                    " has the wrong length");
      for (std::size_t i = 0; i < arr.size(); ++i) c[static_cast<int>(i)] = arr[i];
    }
    coeff_map[canon] = std::vector<double>(c.data(), c.data() + c.size());
  }
  if (names.empty()) throw std::invalid_argument("no filters requested");
  cfg["filters"] = names;
  cfg["coefficients"] = coeff_map;
  if (trials < 1) throw std::invalid_argument("--trials must be positive");
  cfg["trials"] = trials;
  if (horizon < 0) throw std::invalid_argument("--horizon must be positive");
  cfg["horizon"] = horizon;  // 0: scenario default
  cfg["seed"] = seed;
  cfg["out"] = out_dir;
  return cfg;
}

void run_estimate(const json& cfg, int jobs) {
  const std::string case_path = cfg.at("case").get<std::string>();
  const std::string out_dir = cfg.at("out").get<std::string>();
  dsekit::bus_system sys = dsekit::bus_system::from_file(case_path);
  dsekit::measurement_plan plan = dsekit::measurement_plan::full(sys);
  dsekit::grid_model model(std::move(sys), std::move(plan));

  dsekit::experiment_config ec;
  ec.scenario = dsekit::scenario_spec::from_json(cfg.at("scenario"));
  for (const auto& name : cfg.at("filters")) {
    const std::string canon = name.get<std::string>();
    const dsekit::filter_variant v = dsekit::variant_from_name(canon);
    dsekit::filter_config fc = dsekit::filter_config::defaults_for(
        v, model.state_dim(), model.meas_dim());
    const auto arr = cfg.at("coefficients").at(canon).get<std::vector<double>>();
    Eigen::VectorXd c(static_cast<int>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) c[static_cast<int>(i)] = arr[i];
    fc.apply_coefficients(c);
    ec.filter_names.push_back(canon);
    ec.filters.push_back(std::move(fc));
  }
  ec.trials = cfg.at("trials").get<int>();
  ec.horizon = cfg.at("horizon").get<int>();
  ec.master_seed = cfg.at("seed").get<std::uint64_t>();
  ec.jobs = jobs;

  const dsekit::experiment_report rep = dsekit::run_experiment(model, ec);

  dsekit::write_text_file(join_path(out_dir, "report.csv"),
                          dsekit::csv_join(dsekit::comparison_rows(rep)));

  std::vector<std::vector<std::string>> curves;
  std::vector<std::string> header{"step"};
  for (const auto& f : rep.filters) {
    header.push_back("phase_" + f.name);
    header.push_back("magnitude_" + f.name);
  }
  curves.push_back(header);
  const std::size_t horizon = rep.filters.front().armse_phase.size();
  for (std::size_t t = 0; t < horizon; ++t) {
    std::vector<std::string> row{std::to_string(t + 1)};
    for (const auto& f : rep.filters) {
      row.push_back(dsekit::format_double(f.armse_phase[t]));
      row.push_back(dsekit::format_double(f.armse_magnitude[t]));
    }
    curves.push_back(std::move(row));
  }
  dsekit::write_text_file(join_path(out_dir, "armse_curves.csv"),
                          dsekit::csv_join(curves));

  json summary;
  summary["trials_requested"] = rep.trials_requested;
  summary["trials_used"] = rep.trials_used;
  summary["excluded_trials"] = rep.excluded_trials;
  summary["trial_hashes"] = rep.trial_hashes;
  summary["improvement_formula"] = "(baseline - candidate) / baseline";
  json per_filter = json::object();
  for (const auto& f : rep.filters) {
    per_filter[f.name] = {{"phase_armse", f.scalar_phase},
                          {"magnitude_armse", f.scalar_magnitude},
                          {"convergence_rate", f.convergence_rate},
                          {"fallback_rate", f.fallback_rate}};
  }
  summary["filters"] = per_filter;
  dsekit::write_text_file(join_path(out_dir, "summary.json"),
                          summary.dump(2) + "\n");

  json timing = timing_sidecar_stub();
  timing["generation_seconds"] = rep.generation_seconds;
  json ft = json::object();
  for (const auto& f : rep.filters) ft[f.name] = f.runtime_seconds;
  timing["filter_seconds"] = ft;
  dsekit::write_text_file(join_path(out_dir, "timing.json"),
                          timing.dump(2) + "\n");

  dsekit::run_manifest man;
  man.command = "estimate";
  man.config = cfg;
  man.master_seed = ec.master_seed;
  man.input_hashes.emplace_back(case_path,
                                dsekit::hex64(dsekit::hash_file(case_path)));
  man.outputs = {"report.csv", "armse_curves.csv", "summary.json"};
  man.save(join_path(out_dir, "manifest.json"));
}

// -------------------------------------------------------------------- tune

json build_tune_config(const std::string& case_arg,
                       const std::string& scenario_arg,
                       const std::string& variant_arg, int agents, int iters,
                       std::uint64_t seed, int fit_trials, int fit_horizon,
                       std::uint64_t fit_seed, const std::string& bounds_path,
                       const std::string& out_dir) {
  json cfg;
  cfg["case"] = dsekit::resolve_case_path(case_arg);
  cfg["case_alias"] = case_arg;
  cfg["scenario"] =
      dsekit::scenario_spec::from_name_or_file(scenario_arg).to_json();
  const dsekit::filter_variant v = dsekit::variant_from_name(variant_arg);
  cfg["variant"] = dsekit::variant_name(v);
  if (agents < 2) throw std::invalid_argument("--agents must be at least 2");
  if (iters < 1) throw std::invalid_argument("--iters must be positive");
  if (fit_trials < 1) throw std::invalid_argument("--fit-trials must be positive");
  if (fit_horizon < 1) throw std::invalid_argument("--fit-horizon must be positive");
  cfg["agents"] = agents;
  cfg["iters"] = iters;
  cfg["seed"] = seed;
  cfg["fit_trials"] = fit_trials;
  cfg["fit_horizon"] = fit_horizon;
  cfg["fit_seed"] = fit_seed;
  Eigen::VectorXd lower, upper;
  dsekit::default_tuning_bounds(v, lower, upper);
  if (!bounds_path.empty()) {
    const json jb = json::parse(dsekit::read_text_file(bounds_path));
    const auto lo = jb.at("lower").get<std::vector<double>>();
    const auto hi = jb.at("upper").get<std::vector<double>>();
    if (lo.size() != static_cast<std::size_t>(lower.size()) ||
        hi.size() != lo.size())
      throw std::invalid_argument("bounds arrays have the wrong length");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!(lo[i] < hi[i]))
        throw std::invalid_argument("bounds must satisfy lower < upper");
      lower[static_cast<int>(i)] = lo[i];
      upper[static_cast<int>(i)] = hi[i];
    }
  }
  cfg["lower"] = std::vector<double>(lower.data(), lower.data() + lower.size());
  cfg["upper"] = std::vector<double>(upper.data(), upper.data() + upper.size());
  cfg["out"] = out_dir;
  return cfg;
}

void run_tune(const json& cfg, int /*jobs*/) {
  const std::string case_path = cfg.at("case").get<std::string>();
  const std::string out_dir = cfg.at("out").get<std::string>();
  dsekit::bus_system sys = dsekit::bus_system::from_file(case_path);
  dsekit::measurement_plan plan = dsekit::measurement_plan::full(sys);
  dsekit::grid_model model(std::move(sys), std::move(plan));

  dsekit::tuning_config tc;
  tc.variant = dsekit::variant_from_name(cfg.at("variant").get<std::string>());
  tc.agents = cfg.at("agents").get<int>();
  tc.iterations = cfg.at("iters").get<int>();
  tc.seed = cfg.at("seed").get<std::uint64_t>();
  tc.fit_trials = cfg.at("fit_trials").get<int>();
  tc.fit_horizon = cfg.at("fit_horizon").get<int>();
  tc.fit_master_seed = cfg.at("fit_seed").get<std::uint64_t>();
  const auto lo = cfg.at("lower").get<std::vector<double>>();
  const auto hi = cfg.at("upper").get<std::vector<double>>();
  tc.lower.resize(static_cast<int>(lo.size()));
  tc.upper.resize(static_cast<int>(hi.size()));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    tc.lower[static_cast<int>(i)] = lo[i];
    tc.upper[static_cast<int>(i)] = hi[i];
  }
  const dsekit::scenario_spec scenario =
      dsekit::scenario_spec::from_json(cfg.at("scenario"));

  const dsekit::tuning_result res =
      dsekit::tune_coefficients(model, scenario, tc);

  json out;
  out["variant"] = cfg.at("variant");
  out["coefficients"] =
      std::vector<double>(res.coefficients.data(),
                          res.coefficients.data() + res.coefficients.size());
  out["objective"] = res.objective;
  out["default_objective"] = res.default_objective;
  out["improvement_pct"] =
      res.default_objective > 0.0
          ? 100.0 * (res.default_objective - res.objective) / res.default_objective
          : 0.0;
  out["evaluations"] = res.evaluations;
  dsekit::write_text_file(join_path(out_dir, "coefficients.json"),
                          out.dump(2) + "\n");

  std::vector<std::vector<std::string>> hist;
  hist.push_back({"iteration", "best_objective"});
  for (std::size_t i = 0; i < res.history.size(); ++i)
    hist.push_back({std::to_string(i), dsekit::format_double(res.history[i])});
  dsekit::write_text_file(join_path(out_dir, "history.csv"),
                          dsekit::csv_join(hist));

  dsekit::run_manifest man;
  man.command = "tune";
  man.config = cfg;
  man.master_seed = tc.seed;
  man.input_hashes.emplace_back(case_path,
                                dsekit::hex64(dsekit::hash_file(case_path)));
  man.outputs = {"coefficients.json", "history.csv"};
  man.save(join_path(out_dir, "manifest.json"));
}

// ---------------------------------------------------------------- benchopt

json build_benchopt_config(const std::string& optimizers_arg,
                           const std::string& functions_arg, int seeds,
                           int iters, int agents, std::uint64_t seed,
                           const std::string& out_dir) {
  json cfg;
  json opts = json::array();
  for (const auto& o : split_list(optimizers_arg)) {
    if (o != "bwb" && o != "bwo" && o != "pso")
      throw std::invalid_argument("unknown optimizer '" + o + "'");
    opts.push_back(o);
  }
  if (opts.empty()) throw std::invalid_argument("no optimizers requested");
  cfg["optimizers"] = opts;
  json funcs = json::array();
  if (functions_arg == "all") {
    for (const auto& b : dsekit::benchmark_suite()) funcs.push_back(b.name);
  } else {
    for (const auto& f : split_list(functions_arg))
      funcs.push_back(dsekit::benchmark_by_name(f).name);
  }
  if (funcs.empty()) throw std::invalid_argument("no functions requested");
  cfg["functions"] = funcs;
  if (seeds < 1) throw std::invalid_argument("--seeds must be positive");
  if (iters < 1) throw std::invalid_argument("--iters must be positive");
  if (agents < 2) throw std::invalid_argument("--agents must be at least 2");
  cfg["seeds"] = seeds;
  cfg["iters"] = iters;
  cfg["agents"] = agents;
  cfg["seed"] = seed;
  cfg["out"] = out_dir;
  return cfg;
}

void run_benchopt(const json& cfg, int /*jobs*/) {
  const std::string out_dir = cfg.at("out").get<std::string>();
  const int seeds = cfg.at("seeds").get<int>();
  const int iters = cfg.at("iters").get<int>();
  const int agents = cfg.at("agents").get<int>();
  const std::uint64_t master = cfg.at("seed").get<std::uint64_t>();

  std::vector<std::vector<std::string>> table;
  table.push_back(
      {"function", "optimizer", "median", "q25", "q75", "best", "known_min"});
  std::vector<std::vector<std::string>> curves;
  curves.push_back({"function", "optimizer", "iteration", "median_best"});

  std::uint64_t func_index = 0;
  for (const auto& fname : cfg.at("functions")) {
    const dsekit::benchmark_function& bench =
        dsekit::benchmark_by_name(fname.get<std::string>());
    std::uint64_t opt_index = 0;
    for (const auto& oname : cfg.at("optimizers")) {
      const std::string opt = oname.get<std::string>();
      std::vector<double> finals;
      std::vector<std::vector<double>> histories;
      for (int sd = 0; sd < seeds; ++sd) {
        dsekit::optimizer_config oc;
        oc.agents = agents;
        oc.iterations = iters;
        oc.seed = dsekit::rng::derive(master, func_index, opt_index,
                                      static_cast<std::uint64_t>(sd));
        const dsekit::optimizer_result res = dsekit::run_optimizer(
            opt, bench.f, bench.lower, bench.upper, oc);
        finals.push_back(res.best_value);
        histories.push_back(res.history);
      }
      table.push_back({bench.name, opt, dsekit::format_double(median_of(finals)),
                       dsekit::format_double(quantile_of(finals, 0.25)),
                       dsekit::format_double(quantile_of(finals, 0.75)),
                       dsekit::format_double(
                           *std::min_element(finals.begin(), finals.end())),
                       dsekit::format_double(bench.known_min)});
      for (std::size_t it = 0; it < histories.front().size(); ++it) {
        std::vector<double> column;
        for (const auto& h : histories) column.push_back(h[it]);
        curves.push_back({bench.name, opt, std::to_string(it),
                          dsekit::format_double(median_of(column))});
      }
      ++opt_index;
    }
    ++func_index;
  }

  dsekit::write_text_file(join_path(out_dir, "benchopt.csv"),
                          dsekit::csv_join(table));
  dsekit::write_text_file(join_path(out_dir, "curves.csv"),
                          dsekit::csv_join(curves));

  dsekit::run_manifest man;
  man.command = "benchopt";
  man.config = cfg;
  man.master_seed = master;
  man.outputs = {"benchopt.csv", "curves.csv"};
  man.save(join_path(out_dir, "manifest.json"));
}

// ------------------------------------------------------------------ driver

json load_manifest_config(const std::string& path, const std::string& command) {
  const dsekit::run_manifest man = dsekit::run_manifest::load(path);
  if (man.command != command)
    throw std::invalid_argument("manifest records command '" + man.command +
                                "', not '" + command + "'");
  for (const auto& [input, hash] : man.input_hashes) {
    if (dsekit::hex64(dsekit::hash_file(input)) != hash)
      throw std::invalid_argument("input file changed since manifest: " + input);
  }
  return man.config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power-system dynamic state estimation toolkit"};
  app.require_subcommand(1);

  std::function<void()> job;

  // estimate
  auto* est = app.add_subcommand(
      "estimate", "Run a Monte-Carlo filter comparison on a network case");
  std::string est_case = "ieee14", est_scenario = "1";
  std::string est_filters = "ekf,ukf,mcc-ukf,ckmc-ukf,ckmmc-ukf";
  int est_trials = 20, est_horizon = 0, est_jobs = 1;
  std::uint64_t est_seed = 1;
  std::string est_out = "runs/estimate", est_coeffs, est_manifest;
  est->add_option("--case", est_case, "Case alias (ieee14/ieee30/ieee57) or file path");
  est->add_option("--scenario", est_scenario, "Scenario preset 1/2/3 or JSON file");
  est->add_option("--filters", est_filters, "Comma-separated filter list");
  est->add_option("--trials", est_trials, "Monte-Carlo trials");
  est->add_option("--horizon", est_horizon, "Steps per trial (0: scenario default)");
  est->add_option("--seed", est_seed, "Master seed");
  est->add_option("--coeffs", est_coeffs, "JSON file with coefficient overrides");
  est->add_option("--out", est_out, "Output directory");
  est->add_option("--jobs", est_jobs, "Worker threads (never changes output bytes)");
  est->add_option("--from-manifest", est_manifest,
                  "Reproduce a previous run from its manifest");
  est->callback([&] {
    json cfg;
    if (!est_manifest.empty()) {
      cfg = load_manifest_config(est_manifest, "estimate");
      if (est->count("--out")) cfg["out"] = est_out;
    } else {
      cfg = build_estimate_config(est_case, est_scenario, est_filters,
                                  est_trials, est_horizon, est_seed, est_coeffs,
                                  est_out);
    }
    job = [cfg, est_jobs] { run_estimate(cfg, est_jobs); };
  });

  // tune
  auto* tune = app.add_subcommand(
      "tune", "Search filter coefficients with the hybrid swarm optimizer");
  std::string tune_case = "ieee14", tune_scenario = "1", tune_variant = "ckmmc-ukf";
  int tune_agents = 30, tune_iters = 500, tune_fit_trials = 10,
      tune_fit_horizon = 30;
  std::uint64_t tune_seed = 1, tune_fit_seed = 424242;
  std::string tune_bounds, tune_out = "runs/tune", tune_manifest;
  tune->add_option("--case", tune_case, "Case alias or file path");
  tune->add_option("--scenario", tune_scenario, "Scenario preset 1/2/3 or JSON file");
  tune->add_option("--variant", tune_variant, "Filter variant to tune");
  tune->add_option("--agents", tune_agents, "Swarm size");
  tune->add_option("--iters", tune_iters, "Swarm iterations");
  tune->add_option("--seed", tune_seed, "Optimizer seed");
  tune->add_option("--fit-trials", tune_fit_trials, "Trials per objective evaluation");
  tune->add_option("--fit-horizon", tune_fit_horizon, "Steps per objective trial");
  tune->add_option("--fit-seed", tune_fit_seed, "Fixed seed basis for objective trials");
  tune->add_option("--bounds", tune_bounds, "JSON file {lower:[],upper:[]}");
  tune->add_option("--out", tune_out, "Output directory");
  tune->add_option("--from-manifest", tune_manifest,
                   "Reproduce a previous run from its manifest");
  tune->callback([&] {
    json cfg;
    if (!tune_manifest.empty()) {
      cfg = load_manifest_config(tune_manifest, "tune");
      if (tune->count("--out")) cfg["out"] = tune_out;
    } else {
      cfg = build_tune_config(tune_case, tune_scenario, tune_variant,
                              tune_agents, tune_iters, tune_seed,
                              tune_fit_trials, tune_fit_horizon, tune_fit_seed,
                              tune_bounds, tune_out);
    }
    job = [cfg] { run_tune(cfg, 1); };
  });

  // benchopt
  auto* bench = app.add_subcommand(
      "benchopt", "Compare optimizers on the classical 23-function suite");
  std::string bo_optimizers = "bwb,bwo,pso", bo_functions = "all";
  int bo_seeds = 20, bo_iters = 500, bo_agents = 30;
  std::uint64_t bo_seed = 1;
  std::string bo_out = "runs/benchopt", bo_manifest;
  bench->add_option("--optimizers", bo_optimizers, "Comma-separated optimizer list");
  bench->add_option("--functions", bo_functions, "Comma-separated list or 'all'");
  bench->add_option("--seeds", bo_seeds, "Seeds per (function, optimizer)");
  bench->add_option("--iters", bo_iters, "Iterations per run");
  bench->add_option("--agents", bo_agents, "Swarm size");
  bench->add_option("--seed", bo_seed, "Master seed");
  bench->add_option("--out", bo_out, "Output directory");
  bench->add_option("--from-manifest", bo_manifest,
                    "Reproduce a previous run from its manifest");
  bench->callback([&] {
    json cfg;
    if (!bo_manifest.empty()) {
      cfg = load_manifest_config(bo_manifest, "benchopt");
      if (bench->count("--out")) cfg["out"] = bo_out;
    } else {
      cfg = build_benchopt_config(bo_optimizers, bo_functions, bo_seeds,
                                  bo_iters, bo_agents, bo_seed, bo_out);
    }
    job = [cfg] { run_benchopt(cfg, 1); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    // Configuration resolution happens inside subcommand callbacks.
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    job();
  } catch (const dsekit::experiment_error& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
