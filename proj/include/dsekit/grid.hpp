#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace dsekit {

struct bus_data {
  int number = 0;      // label as it appears in the file
  int type = 0;        // 0/1 load, 2 voltage-controlled, 3 slack
  double v_mag = 1.0;  // solved magnitude, p.u.
  double v_ang_deg = 0.0;
  double p_load = 0.0, q_load = 0.0;  // MW / MVAr
  double p_gen = 0.0, q_gen = 0.0;
  double g_shunt = 0.0, b_shunt = 0.0;  // p.u.
};

struct branch_data {
  int from = 0, to = 0;  // bus labels
  double r = 0.0, x = 0.0;
  double charging = 0.0;  // total line charging susceptance, p.u.
  double tap = 1.0;       // off-nominal turns ratio on the from side
};

// A solved network case: buses, branches, and the bus admittance matrix.
class bus_system {
 public:
  static bus_system parse_cdf(const std::string& text);
  static bus_system parse_matrix_case(const std::string& text);
  // Dispatches on extension: .cdf/.txt -> parse_cdf, .m -> parse_matrix_case.
  static bus_system from_file(const std::string& path);

  int size() const { return static_cast<int>(buses.size()); }
  int index_of(int bus_number) const;  // throws on unknown label
  int slack_index() const { return slack_index_; }

  Eigen::MatrixXcd build_admittance() const;

  double base_mva = 100.0;
  std::vector<bus_data> buses;
  std::vector<branch_data> branches;

 private:
  void finish();  // validates and locates the slack bus
  int slack_index_ = -1;
};

enum class meas_kind {
  voltage_mag,
  real_injection,
  reactive_injection,
  real_flow,
  reactive_flow,
};

struct measurement {
  meas_kind kind;
  int index;  // bus index for magnitudes/injections, branch index for flows
};

struct measurement_plan {
  std::vector<measurement> channels;
  // Magnitudes at every bus, P/Q injections at every bus, P/Q flows on every
  // branch (from side), in that order.
  static measurement_plan full(const bus_system& sys);
};

// Measurement function h(x) over the state x = [angles of all non-slack
// buses; magnitudes of all buses]. The slack angle is pinned to zero, so
// dim(x) = 2 L - 1 for L buses.
class grid_model {
 public:
  grid_model(bus_system sys, measurement_plan plan);

  int state_dim() const { return 2 * sys_.size() - 1; }
  int meas_dim() const { return static_cast<int>(plan_.channels.size()); }
  int bus_count() const { return sys_.size(); }

  // Position of bus i's magnitude inside the state vector.
  int magnitude_index(int bus_index) const {
    return sys_.size() - 1 + bus_index;
  }
  // Position of bus i's angle, or -1 for the slack bus.
  int angle_index(int bus_index) const { return angle_pos_[bus_index]; }

  // State assembled from the solved case, slack angle rebased to zero.
  Eigen::VectorXd initial_state() const;

  Eigen::VectorXd measure(const Eigen::VectorXd& x) const;
  // Central finite differences, step 1e-6 per coordinate.
  Eigen::MatrixXd measurement_jacobian(const Eigen::VectorXd& x) const;

  const bus_system& system() const { return sys_; }
  const measurement_plan& plan() const { return plan_; }

 private:
  struct y_entry {
    int col;
    double g, b;
  };
  struct branch_terms {
    int f, t;
    double g, b, b_half, tau;
  };

  void split_state(const Eigen::VectorXd& x, Eigen::VectorXd& theta,
                   Eigen::VectorXd& vm) const;

  bus_system sys_;
  measurement_plan plan_;
  std::vector<std::vector<y_entry>> y_rows_;  // sparse admittance rows
  std::vector<branch_terms> branch_terms_;
  std::vector<int> angle_pos_;
  std::vector<char> need_injection_;  // per bus
  std::vector<char> need_flow_;       // per branch
  bool any_injection_ = false;
  bool any_flow_ = false;
};

// Resolves a case alias ("ieee14", "ieee30", "ieee57", or a literal path)
// against the bundled data directory; DSEKIT_DATA_DIR env var overrides the
// build-time default.
std::string resolve_case_path(const std::string& name_or_path);

}  // namespace dsekit
