#pragma once

#include <Eigen/Dense>

namespace dsekit {

// Two-parameter exponential smoothing used as the process model. Feeding the
// latest state estimate x produces the one-step-ahead forecast
//
//   level = upsilon * x + (1 - upsilon) * forecast_prev
//   trend = theta * (level - level_prev) + (1 - theta) * trend_prev
//   forecast = level + trend
//
// which is affine in x: forecast = slope() * x + offset(). The slope is the
// constant upsilon * (1 + theta), so the predict step of every filter stays
// linear with a scalar transition gain regardless of the measurement model.
// The trend update must be the convex combination in theta: putting a gain
// larger than theta on the level difference makes the estimate-to-forecast
// feedback loop unstable whenever a measurement update corrects weakly, and
// a filter that rejects outlier channels then diverges geometrically.
// The defaults keep the slope at 0.5 and the trend essentially frozen. On
// the quasi-static trajectories the estimators model, a slope at or above 1
// discounts past information geometrically and pins the posterior at the
// per-scan noise floor, while any appreciable trend gain turns the trend
// state into a slowly mixing integrator of estimation chatter that the
// filters perceive as unmodeled process noise. Both parameters stay
// configurable for genuinely drifting loads.
class holt_forecaster {
 public:
  holt_forecaster() = default;

  holt_forecaster(double upsilon, double theta, const Eigen::VectorXd& x0)
      : upsilon_(upsilon),
        theta_(theta),
        level_prev_(x0),
        trend_prev_(Eigen::VectorXd::Zero(x0.size())),
        forecast_prev_(x0) {}

  double slope() const { return upsilon_ * (1.0 + theta_); }

  Eigen::VectorXd offset() const {
    return (1.0 + theta_) * (1.0 - upsilon_) * forecast_prev_ -
           theta_ * level_prev_ + (1.0 - theta_) * trend_prev_;
  }

  // Absorbs the newest estimate and returns the forecast for the next step.
  // Equals slope() * x + offset() evaluated before the internal update.
  Eigen::VectorXd advance(const Eigen::VectorXd& x) {
    const Eigen::VectorXd level = upsilon_ * x + (1.0 - upsilon_) * forecast_prev_;
    const Eigen::VectorXd trend =
        theta_ * (level - level_prev_) + (1.0 - theta_) * trend_prev_;
    const Eigen::VectorXd forecast = level + trend;
    level_prev_ = level;
    trend_prev_ = trend;
    forecast_prev_ = forecast;
    return forecast;
  }

  double upsilon() const { return upsilon_; }
  double theta() const { return theta_; }
  const Eigen::VectorXd& last_forecast() const { return forecast_prev_; }

 private:
  double upsilon_ = 0.5;
  double theta_ = 1e-6;
  Eigen::VectorXd level_prev_;
  Eigen::VectorXd trend_prev_;
  Eigen::VectorXd forecast_prev_;
};

}  // namespace dsekit
