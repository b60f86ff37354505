#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

namespace dsekit {

// Composite sigma-point scaling parameter. `omega` is the spread factor and
// `lambda_shift` an additive tuning term; n + zeta must stay positive so the
// sigma-point radius sqrt(n + zeta) is real.
inline double compute_zeta(int n, double omega, double lambda_shift = 0.0) {
  const double zeta = omega * omega * (n + lambda_shift) - n;
  if (n + zeta <= 0.0)
    throw std::invalid_argument("sigma-point scaling gives n + zeta <= 0");
  return zeta;
}

struct ut_weights {
  Eigen::VectorXd mean;  // 2n+1 entries
  Eigen::VectorXd cov;
};

// Center weight zeta/(n+zeta) for the mean; the covariance center weight adds
// the (1 - omega^2 + kurtosis) correction. Off-center weights 1/(2(n+zeta)).
inline ut_weights make_ut_weights(int n, double zeta, double omega,
                                  double kurtosis) {
  ut_weights w;
  const int count = 2 * n + 1;
  w.mean.resize(count);
  w.cov.resize(count);
  w.mean[0] = zeta / (n + zeta);
  w.cov[0] = zeta / (n + zeta) + (1.0 - omega * omega + kurtosis);
  for (int i = 1; i < count; ++i) {
    w.mean[i] = 1.0 / (2.0 * (n + zeta));
    w.cov[i] = w.mean[i];
  }
  return w;
}

// Columns [mean, mean + s_i ..., mean - s_i ...] with s_i the columns of the
// lower Cholesky factor of (n + zeta) P. A failed factorization gets a
// diagonal jitter of 1e-10 * trace(P)/n, retried up to three times; an
// all-zero covariance yields zero offsets.
inline Eigen::MatrixXd sigma_points(const Eigen::VectorXd& mean,
                                    const Eigen::MatrixXd& cov, double zeta) {
  const int n = static_cast<int>(mean.size());
  if (cov.rows() != n || cov.cols() != n)
    throw std::invalid_argument("covariance shape mismatch");
  Eigen::MatrixXd pts(n, 2 * n + 1);
  pts.col(0) = mean;

  if (cov.trace() <= 0.0) {
    for (int i = 0; i < n; ++i) {
      pts.col(1 + i) = mean;
      pts.col(1 + n + i) = mean;
    }
    return pts;
  }

  const Eigen::MatrixXd scaled = (n + zeta) * cov;
  Eigen::MatrixXd attempt = scaled;
  const double jitter = 1e-10 * cov.trace() / n;
  Eigen::LLT<Eigen::MatrixXd> llt(attempt);
  for (int tries = 0; llt.info() != Eigen::Success && tries < 3; ++tries) {
    attempt.diagonal().array() += jitter;
    llt.compute(attempt);
  }
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sigma-point factorization failed");
  const Eigen::MatrixXd s = llt.matrixL();
  for (int i = 0; i < n; ++i) {
    pts.col(1 + i) = mean + s.col(i);
    pts.col(1 + n + i) = mean - s.col(i);
  }
  return pts;
}

struct ut_result {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;    // propagated spread, no additive noise term
  Eigen::MatrixXd cross;  // input-output cross covariance
};

// Weighted statistics of f applied to each sigma point. The moment sums are
// expressed as dense products over the deviation matrices so they run as
// three matrix multiplies instead of 2n+1 rank-one updates.
inline ut_result unscented_transform(
    const Eigen::MatrixXd& points, const ut_weights& w,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f) {
  const int count = static_cast<int>(points.cols());
  const Eigen::VectorXd y0 = f(points.col(0));
  const int m = static_cast<int>(y0.size());
  Eigen::MatrixXd ys(m, count);
  ys.col(0) = y0;
  for (int i = 1; i < count; ++i) ys.col(i) = f(points.col(i));

  ut_result r;
  r.mean = ys * w.mean;
  const Eigen::VectorXd x_mean = points * w.mean;
  const Eigen::MatrixXd dy = ys.colwise() - r.mean;
  const Eigen::MatrixXd dx = points.colwise() - x_mean;
  const Eigen::MatrixXd dy_weighted = dy * w.cov.asDiagonal();
  r.cov.noalias() = dy_weighted * dy.transpose();
  r.cross.noalias() = dx * dy_weighted.transpose();
  return r;
}

}  // namespace dsekit
