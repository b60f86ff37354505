#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsekit/correntropy.hpp"
#include "dsekit/holt.hpp"

namespace dsekit {

enum class filter_variant { ekf, ukf, mcc_ukf, ckmc_ukf, ckmmc_ukf };

std::string variant_name(filter_variant v);
filter_variant variant_from_name(const std::string& name);

struct filter_config {
  filter_variant variant = filter_variant::ukf;
  double alpha = 1.0;  // sigma-point spread
  double beta = 0.1;   // center covariance correction
  double lambda_shift = 0.0;
  kernel_mixture mixture;  // robust variants only
  double epsilon = 1e-6;   // fixed-point relative step tolerance
  int max_iterations = 50;
  double holt_upsilon = 0.5;
  double holt_theta = 1e-6;
  Eigen::MatrixXd process_cov;      // Q
  Eigen::MatrixXd measurement_cov;  // R

  // Reference coefficients per variant plus Q = 1e-5 I, R = 1e-2 I.
  static filter_config defaults_for(filter_variant v, int state_dim,
                                    int meas_dim);

  // Tuner packing: ukf/ekf [alpha beta], mcc [alpha beta eta],
  // ckmc [alpha beta sigma1], ckmmc [alpha beta sigma1 sigma2].
  Eigen::VectorXd coefficients() const;
  void apply_coefficients(const Eigen::VectorXd& c);
};

struct update_diagnostics {
  int iterations = 0;
  bool converged = true;
  bool fallback = false;
  bool pinv_path = false;
};

struct filter_state {
  Eigen::VectorXd x;
  Eigen::MatrixXd p;
  holt_forecaster holt;
  update_diagnostics last;

  static filter_state init(const Eigen::VectorXd& x0, const Eigen::MatrixXd& p0,
                           const filter_config& cfg);
};

struct measurement_model {
  int state_dim = 0;
  int meas_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> h;
  // Optional; when absent the extended filter differentiates h numerically.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

// Moore-Penrose pseudoinverse via SVD; singular values below
// 1e-12 * sigma_max are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a);

// Statistically linearized measurement matrix and the whitened stacked
// regression the fixed-point update solves.
struct regression_model {
  Eigen::MatrixXd u;         // linearized measurement matrix
  Eigen::MatrixXd b_p, b_r;  // lower Cholesky factors of prior cov and R
  Eigen::MatrixXd d;         // (n+m) x n stacked regressor
  Eigen::VectorXd l;         // stacked observation
};

regression_model build_regression(const Eigen::VectorXd& x_prior,
                                  const Eigen::MatrixXd& p_prior,
                                  const Eigen::MatrixXd& p_xy,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& y_hat,
                                  const Eigen::MatrixXd& r);

// Weighted least squares through the normal equations with a pseudoinverse;
// the reference solution the gain-form fixed-point iterate must agree with.
Eigen::VectorXd normal_equations_solve(const Eigen::MatrixXd& d,
                                       const Eigen::VectorXd& l,
                                       const Eigen::VectorXd& theta);

// Joseph-form posterior covariance (I-KU) P (I-KU)' + K R K', symmetrized.
Eigen::MatrixXd joseph_update(const Eigen::MatrixXd& p_prior,
                              const Eigen::MatrixXd& gain,
                              const Eigen::MatrixXd& u, const Eigen::MatrixXd& r);

struct predict_result {
  Eigen::VectorXd x;
  Eigen::MatrixXd p;
};

// Exponential-smoothing time update: x' = slope x + offset,
// P' = slope^2 P + Q. Advances the forecaster state.
predict_result predict(filter_state& state, const filter_config& cfg);

void ukf_step(filter_state& state, const measurement_model& model,
              const Eigen::VectorXd& y, const filter_config& cfg);
void ekf_step(filter_state& state, const measurement_model& model,
              const Eigen::VectorXd& y, const filter_config& cfg);
void robust_step(filter_state& state, const measurement_model& model,
                 const Eigen::VectorXd& y, const filter_config& cfg);
// Dispatches on cfg.variant.
void filter_step(filter_state& state, const measurement_model& model,
                 const Eigen::VectorXd& y, const filter_config& cfg);

struct step_record {
  int t = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd p_diag;
  update_diagnostics diag;
};

struct filter_divergence : std::runtime_error {
  int step;
  explicit filter_divergence(int t)
      : std::runtime_error("filter state became non-finite at step " +
                           std::to_string(t)),
        step(t) {}
  filter_divergence(int t, const std::string& why)
      : std::runtime_error("filter diverged at step " + std::to_string(t) +
                           ": " + why),
        step(t) {}
};

// Runs one filter over a measurement sequence (columns are time steps).
// Numerical failures inside a step (factorizations giving up, non-finite
// state or covariance) surface as filter_divergence with the step index.
std::vector<step_record> run_filter(const measurement_model& model,
                                    const filter_config& cfg,
                                    const Eigen::VectorXd& x0,
                                    const Eigen::MatrixXd& p0,
                                    const Eigen::MatrixXd& measurements);

}  // namespace dsekit
