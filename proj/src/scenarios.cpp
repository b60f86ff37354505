#include "dsekit/scenarios.hpp"

#include <cmath>
#include <filesystem>

#include "dsekit/report.hpp"

namespace dsekit {

void noise_model::validate() const {
  if (components.empty())
    throw std::invalid_argument("noise model needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("component weight must be positive");
    if (!(c.param > 0.0))
      throw std::invalid_argument("component variance/scale must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("component weights must sum to one");
}

double noise_model::sample(rng& gen) const {
  double u = gen.uniform();
  const noise_component* chosen = &components.back();
  for (const auto& c : components) {
    if (u < c.weight) {
      chosen = &c;
      break;
    }
    u -= c.weight;
  }
  if (chosen->family == noise_family::gaussian)
    return gen.normal(chosen->mean, std::sqrt(chosen->param));
  return gen.laplace(chosen->mean, chosen->param);
}

double noise_model::variance() const {
  double mean = 0.0;
  for (const auto& c : components) mean += c.weight * c.mean;
  double second = 0.0;
  for (const auto& c : components) {
    const double var =
        c.family == noise_family::gaussian ? c.param : 2.0 * c.param * c.param;
    second += c.weight * (var + c.mean * c.mean);
  }
  return second - mean * mean;
}

noise_model noise_model::gaussian(double mean, double variance) {
  noise_model m;
  m.components.push_back({1.0, noise_family::gaussian, mean, variance});
  return m;
}

noise_model noise_model::laplace(double mean, double scale) {
  noise_model m;
  m.components.push_back({1.0, noise_family::laplace, mean, scale});
  return m;
}

scenario_spec scenario_spec::preset(int which) {
  scenario_spec s;
  s.horizon = 100;
  s.default_trials = 200;
  switch (which) {
    case 1:
      s.name = "scenario1";
      s.process = noise_model::laplace(0.0, 1e-5);
      s.measurement.components = {
          {0.8, noise_family::gaussian, 0.0, 1e-2},
          {0.2, noise_family::gaussian, 0.0, 0.5},
      };
      break;
    case 2:
      s.name = "scenario2";
      s.process = noise_model::gaussian(0.0, 20.0);
      s.measurement.components = {
          {0.3, noise_family::gaussian, 0.0, 25.0},
          {0.7, noise_family::laplace, 0.0, 0.5},
      };
      s.events = {
          {grid_event::kind::bad_data, 15, 0, 0.90},
          {grid_event::kind::bad_data, 35, 0, 1.15},
      };
      break;
    case 3:
      s.name = "scenario3";
      s.process = noise_model::laplace(0.0, 1e-5);
      s.measurement.components = {
          {0.8, noise_family::gaussian, 0.0, 1e-2},
          {0.2, noise_family::gaussian, 0.0, 0.5},
      };
      s.events = {
          {grid_event::kind::load_change, 15, 5, 0.94},
          {grid_event::kind::load_change, 35, 5, 1.09},
      };
      break;
    default:
      throw std::invalid_argument("unknown scenario preset " + std::to_string(which));
  }
  return s;
}

scenario_spec scenario_spec::from_name_or_file(const std::string& arg) {
  if (arg == "1" || arg == "scenario1") return preset(1);
  if (arg == "2" || arg == "scenario2") return preset(2);
  if (arg == "3" || arg == "scenario3") return preset(3);
  if (std::filesystem::exists(arg))
    return from_json(nlohmann::json::parse(read_text_file(arg)));
  throw std::invalid_argument("unknown scenario '" + arg +
                              "' (expected 1/2/3 or a JSON file path)");
}

namespace {

std::string family_name(noise_family f) {
  return f == noise_family::gaussian ? "gaussian" : "laplace";
}

noise_family family_from(const std::string& s) {
  if (s == "gaussian") return noise_family::gaussian;
  if (s == "laplace") return noise_family::laplace;
  throw std::invalid_argument("unknown noise family '" + s + "'");
}

nlohmann::json model_to_json(const noise_model& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : m.components)
    arr.push_back({{"weight", c.weight},
                   {"family", family_name(c.family)},
                   {"mean", c.mean},
                   {"param", c.param}});
  return arr;
}

noise_model model_from_json(const nlohmann::json& arr) {
  noise_model m;
  for (const auto& e : arr)
    m.components.push_back({e.at("weight").get<double>(),
                            family_from(e.at("family").get<std::string>()),
                            e.at("mean").get<double>(),
                            e.at("param").get<double>()});
  return m;
}

}  // namespace

nlohmann::json scenario_spec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["process"] = model_to_json(process);
  j["measurement"] = model_to_json(measurement);
  nlohmann::json evs = nlohmann::json::array();
  for (const auto& e : events)
    evs.push_back(
        {{"type", e.type == grid_event::kind::bad_data ? "bad_data" : "load_change"},
         {"step", e.step},
         {"bus", e.bus},
         {"factor", e.factor}});
  j["events"] = evs;
  j["horizon"] = horizon;
  j["default_trials"] = default_trials;
  j["noise_scale"] = noise_scale;
  return j;
}

scenario_spec scenario_spec::from_json(const nlohmann::json& j) {
  scenario_spec s;
  s.name = j.at("name").get<std::string>();
  s.process = model_from_json(j.at("process"));
  s.measurement = model_from_json(j.at("measurement"));
  for (const auto& e : j.at("events")) {
    grid_event ev;
    const std::string type = e.at("type").get<std::string>();
    if (type == "bad_data")
      ev.type = grid_event::kind::bad_data;
    else if (type == "load_change")
      ev.type = grid_event::kind::load_change;
    else
      throw std::invalid_argument("unknown event type '" + type + "'");
    ev.step = e.at("step").get<int>();
    ev.bus = e.at("bus").get<int>();
    ev.factor = e.at("factor").get<double>();
    s.events.push_back(ev);
  }
  s.horizon = j.at("horizon").get<int>();
  s.default_trials = j.at("default_trials").get<int>();
  s.noise_scale = j.at("noise_scale").get<double>();
  return s;
}

trial_data generate_trial(const grid_model& model, const scenario_spec& spec,
                          std::uint64_t master_seed, int trial_index) {
  spec.process.validate();
  spec.measurement.validate();
  const int n = model.state_dim();
  const int m = model.meas_dim();
  const int horizon = spec.horizon;
  const int buses = model.bus_count();
  rng gen(rng::derive(master_seed, static_cast<std::uint64_t>(trial_index)));

  trial_data out;
  out.truth.resize(n, horizon + 1);
  out.truth.col(0) = model.initial_state();

  const bool power_channel_mask_needed = !spec.events.empty();
  std::vector<char> is_power;
  if (power_channel_mask_needed) {
    is_power.resize(m, 0);
    const auto& channels = model.plan().channels;
    for (int c = 0; c < m; ++c)
      is_power[c] = channels[c].kind != meas_kind::voltage_mag;
  }

  out.measurements.resize(m, horizon);
  for (int t = 1; t <= horizon; ++t) {
    Eigen::VectorXd x = out.truth.col(t - 1);
    for (int k = 0; k < n; ++k)
      x[k] += spec.noise_scale * spec.process.sample(gen);
    for (const auto& ev : spec.events) {
      if (ev.type == grid_event::kind::load_change && ev.step == t) {
        const int bus = model.system().index_of(ev.bus);
        x[model.magnitude_index(bus)] *= ev.factor;
      }
    }
    for (int b = 0; b < buses; ++b) {
      const double vm = x[model.magnitude_index(b)];
      if (!(vm > 0.0) || !std::isfinite(vm))
        throw trial_error("trial " + std::to_string(trial_index) +
                          ": voltage magnitude left (0, inf) at step " +
                          std::to_string(t));
    }
    out.truth.col(t) = x;

    Eigen::VectorXd clean = model.measure(x);
    for (const auto& ev : spec.events) {
      if (ev.type == grid_event::kind::bad_data && ev.step == t) {
        for (int c = 0; c < m; ++c)
          if (is_power[c]) clean[c] *= ev.factor;
      }
    }
    for (int c = 0; c < m; ++c)
      clean[c] += spec.noise_scale * spec.measurement.sample(gen);
    out.measurements.col(t - 1) = clean;
  }

  std::uint64_t h = fnv1a64(out.truth.data(), sizeof(double) * out.truth.size());
  h = fnv1a64(out.measurements.data(), sizeof(double) * out.measurements.size(), h);
  out.content_hash = h;
  return out;
}

}  // namespace dsekit
