#include "dsekit/grid.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsekit {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& s) { return std::stod(s); }

}  // namespace

int bus_system::index_of(int bus_number) const {
  for (int i = 0; i < size(); ++i)
    if (buses[i].number == bus_number) return i;
  throw std::runtime_error("unknown bus label " + std::to_string(bus_number));
}

void bus_system::finish() {
  if (buses.empty()) throw std::runtime_error("case has no buses");
  if (branches.empty()) throw std::runtime_error("case has no branches");
  slack_index_ = -1;
  for (int i = 0; i < size(); ++i) {
    if (buses[i].type == 3) {
      if (slack_index_ >= 0)
        throw std::runtime_error("case declares more than one slack bus");
      slack_index_ = i;
    }
  }
  if (slack_index_ < 0) throw std::runtime_error("case declares no slack bus");
  for (const auto& br : branches) {
    if (br.r == 0.0 && br.x == 0.0)
      throw std::runtime_error("branch with zero series impedance between " +
                               std::to_string(br.from) + " and " +
                               std::to_string(br.to));
    index_of(br.from);
    index_of(br.to);
  }
}

bus_system bus_system::parse_cdf(const std::string& text) {
  bus_system sys;
  std::istringstream is(text);
  std::string line;

  if (!std::getline(is, line)) throw std::runtime_error("empty CDF input");
  // Base MVA is the first token on the header line that parses as a float
  // with a fractional part.
  sys.base_mva = 100.0;
  for (const auto& tok : split_ws(line)) {
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used == tok.size() && tok.find('.') != std::string::npos) {
        sys.base_mva = v;
        break;
      }
    } catch (...) {
    }
  }

  enum class section { none, bus, branch } sec = section::none;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.rfind("BUS DATA", 0) == 0) {
      sec = section::bus;
      continue;
    }
    if (t.rfind("BRANCH DATA", 0) == 0) {
      sec = section::branch;
      continue;
    }
    if (t[0] == '-') {  // -9 / -99 / -999 terminates the current section
      sec = section::none;
      continue;
    }
    if (sec == section::bus) {
      if (line.size() < 30) throw std::runtime_error("short CDF bus record");
      bus_data b;
      b.number = std::stoi(line.substr(0, 4));
      const auto tok = split_ws(line.substr(17));
      if (tok.size() < 15) throw std::runtime_error("short CDF bus record");
      b.type = std::stoi(tok[2]);
      b.v_mag = to_double(tok[3]);
      b.v_ang_deg = to_double(tok[4]);
      b.p_load = to_double(tok[5]);
      b.q_load = to_double(tok[6]);
      b.p_gen = to_double(tok[7]);
      b.q_gen = to_double(tok[8]);
      b.g_shunt = to_double(tok[13]);
      b.b_shunt = to_double(tok[14]);
      sys.buses.push_back(b);
    } else if (sec == section::branch) {
      const auto tok = split_ws(line);
      if (tok.size() < 15) throw std::runtime_error("short CDF branch record");
      branch_data br;
      br.from = std::stoi(tok[0]);
      br.to = std::stoi(tok[1]);
      br.r = to_double(tok[6]);
      br.x = to_double(tok[7]);
      br.charging = to_double(tok[8]);
      const double tap = to_double(tok[14]);
      br.tap = tap == 0.0 ? 1.0 : tap;
      sys.branches.push_back(br);
    }
  }
  sys.finish();
  return sys;
}

bus_system bus_system::parse_matrix_case(const std::string& text) {
  bus_system sys;
  std::istringstream is(text);
  std::string line;

  enum class section { none, bus, gen, branch } sec = section::none;
  bool saw_bus = false, saw_branch = false;
  while (std::getline(is, line)) {
    std::string t = trim(line);
    const auto pct = t.find('%');
    if (pct != std::string::npos) t = trim(t.substr(0, pct));
    if (t.empty()) continue;

    if (sec == section::none) {
      if (t.rfind("mpc.baseMVA", 0) == 0) {
        const auto eq = t.find('=');
        std::string rhs = t.substr(eq + 1);
        if (auto sc = rhs.find(';'); sc != std::string::npos) rhs = rhs.substr(0, sc);
        sys.base_mva = to_double(trim(rhs));
      } else if (t.rfind("mpc.bus", 0) == 0 && t.find('[') != std::string::npos) {
        sec = section::bus;
        saw_bus = true;
      } else if (t.rfind("mpc.gen", 0) == 0 && t.find('[') != std::string::npos &&
                 t.rfind("mpc.gencost", 0) != 0) {
        sec = section::gen;
      } else if (t.rfind("mpc.branch", 0) == 0 && t.find('[') != std::string::npos) {
        sec = section::branch;
        saw_branch = true;
      }
      continue;
    }

    if (t.find(']') != std::string::npos) {
      sec = section::none;
      continue;
    }
    std::string row = t;
    if (auto sc = row.find(';'); sc != std::string::npos) row = row.substr(0, sc);
    const auto tok = split_ws(row);
    if (tok.empty()) continue;

    if (sec == section::bus) {
      if (tok.size() < 13) throw std::runtime_error("short bus row");
      bus_data b;
      b.number = std::stoi(tok[0]);
      b.type = std::stoi(tok[1]);
      b.p_load = to_double(tok[2]);
      b.q_load = to_double(tok[3]);
      // Gs/Bs are MW/MVAr at nominal voltage; store per unit.
      b.g_shunt = to_double(tok[4]) / sys.base_mva;
      b.b_shunt = to_double(tok[5]) / sys.base_mva;
      b.v_mag = to_double(tok[7]);
      b.v_ang_deg = to_double(tok[8]);
      sys.buses.push_back(b);
    } else if (sec == section::gen) {
      if (tok.size() < 3) throw std::runtime_error("short gen row");
      const int bus = std::stoi(tok[0]);
      for (auto& b : sys.buses) {
        if (b.number == bus) {
          b.p_gen += to_double(tok[1]);
          b.q_gen += to_double(tok[2]);
        }
      }
    } else if (sec == section::branch) {
      if (tok.size() < 11) throw std::runtime_error("short branch row");
      branch_data br;
      br.from = std::stoi(tok[0]);
      br.to = std::stoi(tok[1]);
      br.r = to_double(tok[2]);
      br.x = to_double(tok[3]);
      br.charging = to_double(tok[4]);
      const double ratio = to_double(tok[8]);
      br.tap = ratio == 0.0 ? 1.0 : ratio;
      const int status = std::stoi(tok[10]);
      if (status != 0) sys.branches.push_back(br);
    }
  }
  if (!saw_bus || !saw_branch)
    throw std::runtime_error("matrix case is missing bus or branch tables");
  sys.finish();
  return sys;
}

bus_system bus_system::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open case file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".m") return parse_matrix_case(buf.str());
  return parse_cdf(buf.str());
}

Eigen::MatrixXcd bus_system::build_admittance() const {
  const int n = size();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : branches) {
    const int f = index_of(br.from);
    const int t = index_of(br.to);
    const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
    const std::complex<double> ych(0.0, br.charging / 2.0);
    const double tau = br.tap;
    y(f, f) += (ys + ych) / (tau * tau);
    y(t, t) += ys + ych;
    y(f, t) -= ys / tau;
    y(t, f) -= ys / tau;
  }
  for (int i = 0; i < n; ++i)
    y(i, i) += std::complex<double>(buses[i].g_shunt, buses[i].b_shunt);
  return y;
}

measurement_plan measurement_plan::full(const bus_system& sys) {
  measurement_plan plan;
  const int n = sys.size();
  const int nb = static_cast<int>(sys.branches.size());
  plan.channels.reserve(3 * n + 2 * nb);
  for (int i = 0; i < n; ++i) plan.channels.push_back({meas_kind::voltage_mag, i});
  for (int i = 0; i < n; ++i) plan.channels.push_back({meas_kind::real_injection, i});
  for (int i = 0; i < n; ++i)
    plan.channels.push_back({meas_kind::reactive_injection, i});
  for (int k = 0; k < nb; ++k) plan.channels.push_back({meas_kind::real_flow, k});
  for (int k = 0; k < nb; ++k)
    plan.channels.push_back({meas_kind::reactive_flow, k});
  return plan;
}

grid_model::grid_model(bus_system sys, measurement_plan plan)
    : sys_(std::move(sys)), plan_(std::move(plan)) {
  const int n = sys_.size();
  const Eigen::MatrixXcd y = sys_.build_admittance();
  y_rows_.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::complex<double> v = y(i, j);
      if (v != std::complex<double>(0.0, 0.0))
        y_rows_[i].push_back({j, v.real(), v.imag()});
    }
  }
  angle_pos_.assign(n, -1);
  int pos = 0;
  for (int i = 0; i < n; ++i) {
    if (i == sys_.slack_index()) continue;
    angle_pos_[i] = pos++;
  }
  branch_terms_.reserve(sys_.branches.size());
  for (const auto& br : sys_.branches) {
    const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
    branch_terms_.push_back({sys_.index_of(br.from), sys_.index_of(br.to),
                             ys.real(), ys.imag(), br.charging / 2.0, br.tap});
  }
  need_injection_.assign(n, 0);
  need_flow_.assign(sys_.branches.size(), 0);
  for (const auto& ch : plan_.channels) {
    switch (ch.kind) {
      case meas_kind::voltage_mag:
        break;
      case meas_kind::real_injection:
      case meas_kind::reactive_injection:
        need_injection_[ch.index] = 1;
        any_injection_ = true;
        break;
      case meas_kind::real_flow:
      case meas_kind::reactive_flow:
        need_flow_[ch.index] = 1;
        any_flow_ = true;
        break;
    }
  }
}

Eigen::VectorXd grid_model::initial_state() const {
  const int n = sys_.size();
  Eigen::VectorXd x(state_dim());
  const double slack_deg = sys_.buses[sys_.slack_index()].v_ang_deg;
  constexpr double deg = 3.14159265358979323846 / 180.0;
  for (int i = 0; i < n; ++i) {
    if (angle_pos_[i] >= 0)
      x[angle_pos_[i]] = (sys_.buses[i].v_ang_deg - slack_deg) * deg;
    x[n - 1 + i] = sys_.buses[i].v_mag;
  }
  return x;
}

void grid_model::split_state(const Eigen::VectorXd& x, Eigen::VectorXd& theta,
                             Eigen::VectorXd& vm) const {
  const int n = sys_.size();
  theta.resize(n);
  vm.resize(n);
  for (int i = 0; i < n; ++i) {
    theta[i] = angle_pos_[i] >= 0 ? x[angle_pos_[i]] : 0.0;
    vm[i] = x[n - 1 + i];
  }
}

Eigen::VectorXd grid_model::measure(const Eigen::VectorXd& x) const {
  const int n = sys_.size();
  Eigen::VectorXd theta, vm;
  split_state(x, theta, vm);

  Eigen::VectorXd p_inj, q_inj;
  if (any_injection_) {
    p_inj.setZero(n);
    q_inj.setZero(n);
    for (int i = 0; i < n; ++i) {
      if (!need_injection_[i]) continue;
      double p = 0.0, q = 0.0;
      for (const auto& e : y_rows_[i]) {
        const double dth = theta[i] - theta[e.col];
        const double c = std::cos(dth);
        const double s = std::sin(dth);
        const double vv = vm[i] * vm[e.col];
        p += vv * (e.g * c + e.b * s);
        q += vv * (e.g * s - e.b * c);
      }
      p_inj[i] = p;
      q_inj[i] = q;
    }
  }

  const int nb = static_cast<int>(sys_.branches.size());
  Eigen::VectorXd p_flow, q_flow;
  if (any_flow_) {
    p_flow.setZero(nb);
    q_flow.setZero(nb);
    for (int k = 0; k < nb; ++k) {
      if (!need_flow_[k]) continue;
      const auto& bt = branch_terms_[k];
      const double dth = theta[bt.f] - theta[bt.t];
      const double c = std::cos(dth);
      const double s = std::sin(dth);
      const double vf = vm[bt.f], vt = vm[bt.t];
      p_flow[k] =
          vf * vf * bt.g / (bt.tau * bt.tau) - (vf * vt / bt.tau) * (bt.g * c + bt.b * s);
      q_flow[k] = -vf * vf * (bt.b + bt.b_half) / (bt.tau * bt.tau) -
                  (vf * vt / bt.tau) * (bt.g * s - bt.b * c);
    }
  }

  Eigen::VectorXd out(meas_dim());
  int row = 0;
  for (const auto& ch : plan_.channels) {
    switch (ch.kind) {
      case meas_kind::voltage_mag:
        out[row] = vm[ch.index];
        break;
      case meas_kind::real_injection:
        out[row] = p_inj[ch.index];
        break;
      case meas_kind::reactive_injection:
        out[row] = q_inj[ch.index];
        break;
      case meas_kind::real_flow:
        out[row] = p_flow[ch.index];
        break;
      case meas_kind::reactive_flow:
        out[row] = q_flow[ch.index];
        break;
    }
    ++row;
  }
  return out;
}

Eigen::MatrixXd grid_model::measurement_jacobian(const Eigen::VectorXd& x) const {
  constexpr double h = 1e-6;
  Eigen::MatrixXd jac(meas_dim(), state_dim());
  Eigen::VectorXd xp = x, xm = x;
  for (int j = 0; j < state_dim(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (measure(xp) - measure(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

std::string resolve_case_path(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::exists(name_or_path)) return name_or_path;
  std::string dir = DSEKIT_DATA_DIR;
  if (const char* env = std::getenv("DSEKIT_DATA_DIR"); env && *env) dir = env;
  std::string key = name_or_path;
  for (auto& c : key) c = static_cast<char>(std::tolower(c));
  std::string file;
  if (key == "ieee14" || key == "case14" || key == "14")
    file = "ieee14.cdf";
  else if (key == "ieee30" || key == "case30" || key == "30")
    file = "case30.m";
  else if (key == "ieee57" || key == "case57" || key == "57")
    file = "case57.m";
  else
    throw std::runtime_error("unknown case '" + name_or_path +
                             "' (expected ieee14, ieee30, ieee57, or a path)");
  return (fs::path(dir) / file).string();
}

}  // namespace dsekit
