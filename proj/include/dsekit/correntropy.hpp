#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dsekit {

// Similarity kernels used by the robust update. The Cauchy kernel takes its
// size parameter linearly, 1/(1 + e^2/sigma); the Gaussian analog is
// exp(-e^2 / (2 eta^2)). A mixture holds K >= 1 kernels of one family with
// positive weights delta_j.

enum class kernel_family { cauchy, gaussian };

inline double cauchy_kernel(double e, double sigma) {
  return 1.0 / (1.0 + e * e / sigma);
}

inline double gaussian_kernel(double e, double eta) {
  return std::exp(-e * e / (2.0 * eta * eta));
}

struct kernel_mixture {
  kernel_family family = kernel_family::cauchy;
  Eigen::VectorXd delta;  // component weights
  Eigen::VectorXd sigma;  // kernel sizes

  void validate() const {
    if (delta.size() == 0 || delta.size() != sigma.size())
      throw std::invalid_argument("kernel mixture needs matching, non-empty weights and sizes");
    for (int j = 0; j < delta.size(); ++j) {
      if (!(delta[j] > 0.0) || !(sigma[j] > 0.0))
        throw std::invalid_argument("kernel mixture parameters must be positive");
    }
  }

  static kernel_mixture cauchy_single(double sigma1) {
    kernel_mixture m;
    m.family = kernel_family::cauchy;
    m.delta = Eigen::VectorXd::Constant(1, 1.0);
    m.sigma = Eigen::VectorXd::Constant(1, sigma1);
    return m;
  }

  static kernel_mixture cauchy_pair(double sigma1, double sigma2) {
    kernel_mixture m;
    m.family = kernel_family::cauchy;
    m.delta = Eigen::VectorXd::Constant(2, 0.5);
    m.sigma.resize(2);
    m.sigma << sigma1, sigma2;
    return m;
  }

  static kernel_mixture gaussian_single(double eta) {
    kernel_mixture m;
    m.family = kernel_family::gaussian;
    m.delta = Eigen::VectorXd::Constant(1, 1.0);
    m.sigma = Eigen::VectorXd::Constant(1, eta);
    return m;
  }
};

inline double mixture_score(const kernel_mixture& mix, double e) {
  double s = 0.0;
  for (int j = 0; j < mix.delta.size(); ++j) {
    s += mix.delta[j] * (mix.family == kernel_family::cauchy
                             ? cauchy_kernel(e, mix.sigma[j])
                             : gaussian_kernel(e, mix.sigma[j]));
  }
  return s;
}

// Mean mixture score over a residual vector; the quantity the robust update
// maximizes, so larger is better.
inline double correntropy_cost(const kernel_mixture& mix,
                               const Eigen::VectorXd& errors) {
  double s = 0.0;
  for (int i = 0; i < errors.size(); ++i) s += mixture_score(mix, errors[i]);
  return s / static_cast<double>(errors.size());
}

// Per-residual weight of the half-quadratic fixed-point iteration, floored at
// 1e-12 so the reweighted covariances stay invertible. For the Cauchy family
// each component contributes delta_j / (sigma_j (1 + e^2/sigma_j)^2); for the
// Gaussian family it is the kernel itself.
inline double fixed_point_weight(const kernel_mixture& mix, double e) {
  double s = 0.0;
  for (int j = 0; j < mix.delta.size(); ++j) {
    if (mix.family == kernel_family::cauchy) {
      const double d = 1.0 + e * e / mix.sigma[j];
      s += mix.delta[j] / (mix.sigma[j] * d * d);
    } else {
      s += mix.delta[j] * gaussian_kernel(e, mix.sigma[j]);
    }
  }
  return s < 1e-12 ? 1e-12 : s;
}

inline Eigen::VectorXd weight_vector(const kernel_mixture& mix,
                                     const Eigen::VectorXd& errors) {
  Eigen::VectorXd w(errors.size());
  for (int i = 0; i < errors.size(); ++i) w[i] = fixed_point_weight(mix, errors[i]);
  return w;
}

}  // namespace dsekit
