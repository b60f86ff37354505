#include "dsekit/filters.hpp"

#include <cmath>
#include <limits>

#include "dsekit/unscented.hpp"

namespace dsekit {

std::string variant_name(filter_variant v) {
  switch (v) {
    case filter_variant::ekf: return "ekf";
    case filter_variant::ukf: return "ukf";
    case filter_variant::mcc_ukf: return "mcc-ukf";
    case filter_variant::ckmc_ukf: return "ckmc-ukf";
    case filter_variant::ckmmc_ukf: return "ckmmc-ukf";
  }
  return "?";
}

filter_variant variant_from_name(const std::string& name) {
  if (name == "ekf") return filter_variant::ekf;
  if (name == "ukf") return filter_variant::ukf;
  if (name == "mcc" || name == "mcc-ukf") return filter_variant::mcc_ukf;
  if (name == "ckmc" || name == "ckmc-ukf") return filter_variant::ckmc_ukf;
  if (name == "ckmmc" || name == "ckmmc-ukf") return filter_variant::ckmmc_ukf;
  throw std::invalid_argument("unknown filter variant '" + name + "'");
}

filter_config filter_config::defaults_for(filter_variant v, int state_dim,
                                          int meas_dim) {
  filter_config cfg;
  cfg.variant = v;
  cfg.alpha = 1.0;
  cfg.beta = 0.1;
  switch (v) {
    case filter_variant::ekf:
    case filter_variant::ukf:
      break;
    case filter_variant::mcc_ukf:
      cfg.mixture = kernel_mixture::gaussian_single(5.0);
      break;
    case filter_variant::ckmc_ukf:
      cfg.mixture = kernel_mixture::cauchy_single(1.8);
      break;
    case filter_variant::ckmmc_ukf:
      cfg.mixture = kernel_mixture::cauchy_pair(1.5, 1.5);
      break;
  }
  cfg.process_cov = 1e-5 * Eigen::MatrixXd::Identity(state_dim, state_dim);
  cfg.measurement_cov = 1e-2 * Eigen::MatrixXd::Identity(meas_dim, meas_dim);
  return cfg;
}

Eigen::VectorXd filter_config::coefficients() const {
  switch (variant) {
    case filter_variant::ekf:
    case filter_variant::ukf: {
      Eigen::VectorXd c(2);
      c << alpha, beta;
      return c;
    }
    case filter_variant::mcc_ukf:
    case filter_variant::ckmc_ukf: {
      Eigen::VectorXd c(3);
      c << alpha, beta, mixture.sigma[0];
      return c;
    }
    case filter_variant::ckmmc_ukf: {
      Eigen::VectorXd c(4);
      c << alpha, beta, mixture.sigma[0], mixture.sigma[1];
      return c;
    }
  }
  return {};
}

void filter_config::apply_coefficients(const Eigen::VectorXd& c) {
  const auto need = coefficients().size();
  if (c.size() != need)
    throw std::invalid_argument("coefficient vector size mismatch");
  alpha = c[0];
  beta = c[1];
  if (c.size() > 2) mixture.sigma[0] = c[2];
  if (c.size() > 3) mixture.sigma[1] = c[3];
}

filter_state filter_state::init(const Eigen::VectorXd& x0,
                                const Eigen::MatrixXd& p0,
                                const filter_config& cfg) {
  filter_state st;
  st.x = x0;
  st.p = p0;
  st.holt = holt_forecaster(cfg.holt_upsilon, cfg.holt_theta, x0);
  return st;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? 1e-12 * sv[0] : 0.0;
  Eigen::VectorXd inv(sv.size());
  for (int i = 0; i < sv.size(); ++i) inv[i] = sv[i] > cutoff ? 1.0 / sv[i] : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

namespace {

Eigen::MatrixXd chol_lower(const Eigen::MatrixXd& a, const char* what) {
  Eigen::MatrixXd attempt = a;
  const double jitter =
      1e-10 * (a.trace() > 0.0 ? a.trace() / a.rows() : 1.0);
  Eigen::LLT<Eigen::MatrixXd> llt(attempt);
  for (int tries = 0; llt.info() != Eigen::Success && tries < 3; ++tries) {
    attempt.diagonal().array() += jitter;
    llt.compute(attempt);
  }
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string("Cholesky factorization failed for ") +
                             what);
  return llt.matrixL();
}

Eigen::MatrixXd symmetrize(Eigen::MatrixXd p) {
  return 0.5 * (p + p.transpose());
}

}  // namespace

regression_model build_regression(const Eigen::VectorXd& x_prior,
                                  const Eigen::MatrixXd& p_prior,
                                  const Eigen::MatrixXd& p_xy,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& y_hat,
                                  const Eigen::MatrixXd& r) {
  const int n = static_cast<int>(x_prior.size());
  const int m = static_cast<int>(y.size());
  regression_model reg;
  reg.u = p_prior.ldlt().solve(p_xy).transpose();
  reg.b_p = chol_lower(p_prior, "prior covariance");
  reg.b_r = chol_lower(r, "measurement covariance");

  const auto lp = reg.b_p.triangularView<Eigen::Lower>();
  const auto lr = reg.b_r.triangularView<Eigen::Lower>();
  reg.d.resize(n + m, n);
  reg.d.topRows(n) = lp.solve(Eigen::MatrixXd::Identity(n, n));
  reg.d.bottomRows(m) = lr.solve(reg.u);
  reg.l.resize(n + m);
  reg.l.head(n) = lp.solve(x_prior);
  reg.l.tail(m) = lr.solve((y - y_hat + reg.u * x_prior).eval());
  return reg;
}

Eigen::VectorXd normal_equations_solve(const Eigen::MatrixXd& d,
                                       const Eigen::VectorXd& l,
                                       const Eigen::VectorXd& theta) {
  const Eigen::MatrixXd dt_theta = d.transpose() * theta.asDiagonal();
  return pseudo_inverse(dt_theta * d) * (dt_theta * l);
}

Eigen::MatrixXd joseph_update(const Eigen::MatrixXd& p_prior,
                              const Eigen::MatrixXd& gain,
                              const Eigen::MatrixXd& u,
                              const Eigen::MatrixXd& r) {
  const int n = static_cast<int>(p_prior.rows());
  const Eigen::MatrixXd iku =
      Eigen::MatrixXd::Identity(n, n) - gain * u;
  return symmetrize(iku * p_prior * iku.transpose() +
                    gain * r * gain.transpose());
}

predict_result predict(filter_state& state, const filter_config& cfg) {
  predict_result out;
  const double a = state.holt.slope();
  out.x = a * state.x + state.holt.offset();
  out.p = symmetrize(a * a * state.p + cfg.process_cov);
  state.holt.advance(state.x);
  return out;
}

namespace {

struct propagated {
  Eigen::VectorXd y_hat;
  Eigen::MatrixXd p_yy;  // without measurement noise
  Eigen::MatrixXd p_xy;
};

propagated propagate_measurement(const Eigen::VectorXd& x_prior,
                                 const Eigen::MatrixXd& p_prior,
                                 const measurement_model& model,
                                 const filter_config& cfg) {
  const int n = model.state_dim;
  const double zeta = compute_zeta(n, cfg.alpha, cfg.lambda_shift);
  const Eigen::MatrixXd pts = sigma_points(x_prior, p_prior, zeta);
  const ut_weights w = make_ut_weights(n, zeta, cfg.alpha, cfg.beta);
  const ut_result r = unscented_transform(pts, w, model.h);
  return {r.mean, r.cov, r.cross};
}

}  // namespace

void ukf_step(filter_state& state, const measurement_model& model,
              const Eigen::VectorXd& y, const filter_config& cfg) {
  const predict_result prior = predict(state, cfg);
  const propagated pm = propagate_measurement(prior.x, prior.p, model, cfg);
  const Eigen::MatrixXd s = pm.p_yy + cfg.measurement_cov;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  Eigen::MatrixXd gain;
  update_diagnostics diag;
  diag.iterations = 1;
  if (llt.info() == Eigen::Success) {
    gain = llt.solve(pm.p_xy.transpose()).transpose();
  } else {
    gain = pm.p_xy * pseudo_inverse(s);
    diag.pinv_path = true;
  }
  const Eigen::MatrixXd u = prior.p.ldlt().solve(pm.p_xy).transpose();
  state.x = prior.x + gain * (y - pm.y_hat);
  state.p = joseph_update(prior.p, gain, u, cfg.measurement_cov);
  state.last = diag;
}

void ekf_step(filter_state& state, const measurement_model& model,
              const Eigen::VectorXd& y, const filter_config& cfg) {
  const predict_result prior = predict(state, cfg);
  Eigen::MatrixXd h;
  if (model.jacobian) {
    h = model.jacobian(prior.x);
  } else {
    constexpr double step = 1e-6;
    h.resize(model.meas_dim, model.state_dim);
    Eigen::VectorXd xp = prior.x, xm = prior.x;
    for (int j = 0; j < model.state_dim; ++j) {
      xp[j] += step;
      xm[j] -= step;
      h.col(j) = (model.h(xp) - model.h(xm)) / (2.0 * step);
      xp[j] = prior.x[j];
      xm[j] = prior.x[j];
    }
  }
  const Eigen::VectorXd y_hat = model.h(prior.x);
  const Eigen::MatrixXd s = h * prior.p * h.transpose() + cfg.measurement_cov;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  Eigen::MatrixXd gain;
  update_diagnostics diag;
  diag.iterations = 1;
  if (llt.info() == Eigen::Success) {
    gain = llt.solve(h * prior.p).transpose();
  } else {
    gain = prior.p * h.transpose() * pseudo_inverse(s);
    diag.pinv_path = true;
  }
  state.x = prior.x + gain * (y - y_hat);
  state.p = joseph_update(prior.p, gain, h, cfg.measurement_cov);
  state.last = diag;
}

void robust_step(filter_state& state, const measurement_model& model,
                 const Eigen::VectorXd& y, const filter_config& cfg) {
  cfg.mixture.validate();
  const int n = model.state_dim;
  const int m = model.meas_dim;
  const predict_result prior = predict(state, cfg);
  const propagated pm = propagate_measurement(prior.x, prior.p, model, cfg);
  const regression_model reg = build_regression(prior.x, prior.p, pm.p_xy, y,
                                                pm.y_hat, cfg.measurement_cov);
  // Everything the iteration needs lives in whitened coordinates: the top
  // regressor block is the inverse prior factor, the bottom block the
  // whitened measurement matrix, and iw the whitened innovation. Each
  // reweighted least-squares iterate then reduces to an n x n solve
  //   x = x_prior + (D' Theta D)^-1 u_w' (theta_r . iw),
  // which never inverts a weight, so fully rejected residuals only drop out
  // of the normal matrix instead of amplifying it.
  const auto d_top = reg.d.topRows(n);
  const auto u_w = reg.d.bottomRows(m);
  const Eigen::VectorXd iw = reg.l.tail(m) - u_w * prior.x;

  update_diagnostics diag;
  Eigen::VectorXd x_prev = prior.x;
  Eigen::VectorXd x_best = prior.x;
  Eigen::VectorXd theta_p(n), theta_r(m);
  Eigen::VectorXd theta_p_best = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd theta_r_best = Eigen::VectorXd::Ones(m);
  double best_step = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x_cur;
  Eigen::MatrixXd a(n, n);
  bool converged = false;
  int k = 0;
  while (k < cfg.max_iterations) {
    ++k;
    const Eigen::VectorXd e = reg.l - reg.d * x_prev;
    theta_p = weight_vector(cfg.mixture, e.head(n));
    theta_r = weight_vector(cfg.mixture, e.tail(m));
    a.noalias() = d_top.transpose() * theta_p.asDiagonal() * d_top;
    a.noalias() += u_w.transpose() * theta_r.asDiagonal() * u_w;
    const Eigen::VectorXd rhs =
        u_w.transpose() * theta_r.cwiseProduct(iw).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      x_cur = prior.x + llt.solve(rhs);
    } else {
      // Numerically singular normal matrix: solve the same weighted least
      // squares through the pseudoinverse instead.
      Eigen::VectorXd theta(n + m);
      theta << theta_p, theta_r;
      x_cur = normal_equations_solve(reg.d, reg.l, theta);
      diag.pinv_path = true;
    }
    const double denom = x_prev.norm();
    const double rel = denom > 0.0 ? (x_cur - x_prev).norm() / denom
                                   : (x_cur - x_prev).norm();
    if (rel < best_step) {
      best_step = rel;
      x_best = x_cur;
      theta_p_best = theta_p;
      theta_r_best = theta_r;
    }
    if (rel <= cfg.epsilon) {
      converged = true;
      break;
    }
    x_prev = x_cur;
  }

  diag.iterations = k;
  diag.converged = converged;
  if (!converged) {
    // Keep the iterate that moved least, together with its weights.
    diag.fallback = true;
    x_cur = x_best;
    theta_p = theta_p_best;
    theta_r = theta_r_best;
  }

  // Equivalent gain of the accepted iterate, unwhitened for the covariance
  // update: K = (D' Theta D)^-1 u_w' Theta_r B_R^-1.
  a.noalias() = d_top.transpose() * theta_p.asDiagonal() * d_top;
  a.noalias() += u_w.transpose() * theta_r.asDiagonal() * u_w;
  Eigen::MatrixXd gain_w = u_w.transpose() * theta_r.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    gain_w = llt.solve(gain_w);
  } else {
    gain_w = pseudo_inverse(a) * gain_w;
    diag.pinv_path = true;
  }
  const Eigen::MatrixXd gain =
      reg.b_r.triangularView<Eigen::Lower>().transpose().solve(
          gain_w.transpose()).transpose();

  state.x = x_cur;
  state.p = joseph_update(prior.p, gain, reg.u, cfg.measurement_cov);
  state.last = diag;
}

void filter_step(filter_state& state, const measurement_model& model,
                 const Eigen::VectorXd& y, const filter_config& cfg) {
  switch (cfg.variant) {
    case filter_variant::ekf:
      ekf_step(state, model, y, cfg);
      break;
    case filter_variant::ukf:
      ukf_step(state, model, y, cfg);
      break;
    case filter_variant::mcc_ukf:
    case filter_variant::ckmc_ukf:
    case filter_variant::ckmmc_ukf:
      robust_step(state, model, y, cfg);
      break;
  }
}

std::vector<step_record> run_filter(const measurement_model& model,
                                    const filter_config& cfg,
                                    const Eigen::VectorXd& x0,
                                    const Eigen::MatrixXd& p0,
                                    const Eigen::MatrixXd& measurements) {
  filter_state st = filter_state::init(x0, p0, cfg);
  const int horizon = static_cast<int>(measurements.cols());
  std::vector<step_record> records;
  records.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    try {
      filter_step(st, model, measurements.col(t), cfg);
    } catch (const filter_divergence&) {
      throw;
    } catch (const std::runtime_error& e) {
      // A factorization that gave up mid-step is a divergence of this run,
      // not a usage error.
      throw filter_divergence(t, e.what());
    }
    if (!st.x.allFinite() || !st.p.allFinite()) throw filter_divergence(t);
    records.push_back({t, st.x, st.p.diagonal(), st.last});
  }
  return records;
}

}  // namespace dsekit
