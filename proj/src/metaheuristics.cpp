#include "dsekit/metaheuristics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dsekit/rng.hpp"

namespace dsekit {

namespace {

constexpr double two_pi = 2.0 * 3.14159265358979323846;

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const Eigen::VectorXd& lb,
                          const Eigen::VectorXd& ub) {
  for (int j = 0; j < x.size(); ++j) {
    if (!(x[j] >= lb[j])) x[j] = lb[j];  // also catches NaN
    if (x[j] > ub[j]) x[j] = ub[j];
  }
  return x;
}

struct swarm {
  Eigen::MatrixXd w;    // positions, one row per agent
  Eigen::VectorXd fit;
  Eigen::VectorXd best;
  double best_fit = 0.0;
  long evaluations = 0;
};

swarm init_swarm(const objective_fn& f, const Eigen::VectorXd& lb,
                 const Eigen::VectorXd& ub, const optimizer_config& cfg,
                 rng& gen) {
  if (cfg.agents < 2) throw std::invalid_argument("need at least two agents");
  if (cfg.iterations < 1) throw std::invalid_argument("need at least one iteration");
  if (lb.size() != ub.size() || lb.size() == 0 || (ub - lb).minCoeff() <= 0.0)
    throw std::invalid_argument("invalid search box");
  const int s = static_cast<int>(lb.size());
  swarm sw;
  sw.w.resize(cfg.agents, s);
  for (int i = 0; i < cfg.agents; ++i)
    for (int j = 0; j < s; ++j) sw.w(i, j) = gen.uniform(lb[j], ub[j]);
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != s)
      throw std::invalid_argument("warm start dimension mismatch");
    sw.w.row(0) = clamp_box(*cfg.warm_start, lb, ub).transpose();
  }
  sw.fit.resize(cfg.agents);
  for (int i = 0; i < cfg.agents; ++i) {
    sw.fit[i] = f(sw.w.row(i).transpose());
    ++sw.evaluations;
  }
  int b = 0;
  sw.fit.minCoeff(&b);
  sw.best = sw.w.row(b).transpose();
  sw.best_fit = sw.fit[b];
  return sw;
}

// Index uniform over [0, n) excluding `skip`.
int other_index(rng& gen, int n, int skip) {
  int r = static_cast<int>(gen.integer(static_cast<std::uint64_t>(n - 1)));
  if (r >= skip) ++r;
  return r;
}

// Dimension-permuted crossover move: writes dimension j from a permuted read
// position q_j, pulled toward partner r's q_0 coordinate with a trigonometric
// weight that alternates sine/cosine over even/odd dimensions.
Eigen::VectorXd explore_candidate(const Eigen::MatrixXd& w, int i, int r,
                                  rng& gen) {
  const int s = static_cast<int>(w.cols());
  std::vector<int> q(s);
  std::iota(q.begin(), q.end(), 0);
  for (int j = s - 1; j > 0; --j) {
    const int k = static_cast<int>(gen.integer(static_cast<std::uint64_t>(j + 1)));
    std::swap(q[j], q[k]);
  }
  Eigen::VectorXd c1(s), c2(s);
  for (int j = 0; j < s; ++j) c1[j] = gen.uniform();
  for (int j = 0; j < s; ++j) c2[j] = gen.uniform();
  Eigen::VectorXd cand(s);
  const double partner = w(r, q[0]);
  for (int j = 0; j < s; ++j) {
    const double trig = (j % 2 == 0) ? std::sin(two_pi * c2[j])
                                     : std::cos(two_pi * c2[j]);
    const double base = w(i, q[j]);
    cand[j] = base + (partner - base) * (1.0 + c1[j]) * trig;
  }
  return cand;
}

// Shared reinitialization kick: with probability rho an agent is replaced by
// a random recombination of itself, a peer, and a decaying box offset.
void whale_fall(const objective_fn& f, const Eigen::VectorXd& lb,
                const Eigen::VectorXd& ub, double rho, double decay, int i,
                rng& gen, swarm& sw) {
  const double u = gen.uniform();
  if (u > rho) return;
  const int r2 = other_index(gen, static_cast<int>(sw.w.rows()), i);
  const double c5 = gen.uniform();
  const double c6 = gen.uniform();
  const double c7 = gen.uniform();
  Eigen::VectorXd cand = c5 * sw.w.row(i).transpose() -
                         c6 * sw.w.row(r2).transpose() +
                         c7 * decay * (ub - lb);
  cand = clamp_box(std::move(cand), lb, ub);
  const double cf = f(cand);
  ++sw.evaluations;
  if (cf < sw.fit[i]) {
    sw.w.row(i) = cand.transpose();
    sw.fit[i] = cf;
    if (cf < sw.best_fit) {
      sw.best_fit = cf;
      sw.best = cand;
    }
  }
}

}  // namespace

optimizer_result run_bwb(const objective_fn& f, const Eigen::VectorXd& lb,
                         const Eigen::VectorXd& ub,
                         const optimizer_config& cfg) {
  rng gen(cfg.seed);
  const int s = static_cast<int>(lb.size());
  const int phi = cfg.agents;
  const int tmax = cfg.iterations;
  swarm sw = init_swarm(f, lb, ub, cfg, gen);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(phi, s);
  const double box = (ub - lb).mean();
  double sigma = 0.1 * box;

  optimizer_result out;
  out.history.reserve(tmax + 1);
  out.history.push_back(sw.best_fit);

  for (int t = 0; t < tmax; ++t) {
    const double mu = gen.uniform() * (1.0 - 0.5 * t / tmax);
    const double rho = 0.1 - 0.05 * t / tmax;
    const double pulse_rate = 0.9 * (1.0 - std::exp(-6.0 * t / tmax));
    const double fall_decay = std::exp(-2.0 * rho * phi * t / tmax);
    for (int i = 0; i < phi; ++i) {
      const int r = other_index(gen, phi, i);
      Eigen::VectorXd vc = v.row(i).transpose();
      Eigen::VectorXd cand;
      bool refine = false;
      if (mu > 0.5) {
        cand = explore_candidate(sw.w, i, r, gen);
      } else if (gen.uniform() < pulse_rate) {
        // Local search around an incumbent. Step sizes follow a 1/5-style
        // success rule; rare box-scale probes are excluded from that rule.
        refine = true;
        double scale;
        if (gen.uniform() < 0.05) {
          refine = false;
          const double expo = gen.uniform(-3.0, 0.0);
          scale = box * std::pow(10.0, expo);
        } else if (gen.uniform() < 0.1) {
          scale = sigma * std::abs(gen.cauchy());
        } else {
          scale = sigma;
        }
        const Eigen::VectorXd ctr = gen.uniform() < 0.3
                                        ? sw.w.row(i).transpose()
                                        : sw.best;
        const double mode = gen.uniform();
        if (mode < 0.4) {
          const int j = static_cast<int>(gen.integer(static_cast<std::uint64_t>(s)));
          cand = ctr;
          cand[j] += gen.normal() * scale;
        } else if (mode < 0.7) {
          cand = ctr;
          const double per_dim = scale / std::sqrt(static_cast<double>(s));
          for (int j = 0; j < s; ++j) cand[j] += gen.normal() * per_dim;
        } else {
          const int a = static_cast<int>(gen.integer(static_cast<std::uint64_t>(phi)));
          const int b2 = static_cast<int>(gen.integer(static_cast<std::uint64_t>(phi)));
          const Eigen::VectorXd d =
              sw.w.row(a).transpose() - sw.w.row(b2).transpose();
          const double nd = d.norm();
          if (nd > 0.0) {
            cand = ctr + gen.normal() * scale * d / nd;
          } else {
            cand = ctr;
            const double per_dim = scale / std::sqrt(static_cast<double>(s));
            for (int j = 0; j < s; ++j) cand[j] += gen.normal() * per_dim;
          }
        }
      } else {
        const double freq =
            cfg.freq_min + (cfg.freq_max - cfg.freq_min) * gen.uniform();
        vc = v.row(i).transpose() + (sw.w.row(i).transpose() - sw.best) * freq;
        cand = sw.w.row(i).transpose() + vc;
      }
      cand = clamp_box(std::move(cand), lb, ub);
      const double cf = f(cand);
      ++sw.evaluations;
      if (refine) {
        sigma *= std::exp(0.1 * ((cf < sw.best_fit ? 1.0 : 0.0) - 0.2));
        sigma = std::min(std::max(sigma, 1e-18 * box), box);
      }
      if (cf < sw.fit[i]) {
        sw.w.row(i) = cand.transpose();
        sw.fit[i] = cf;
        v.row(i) = vc.transpose();
        if (cf < sw.best_fit) {
          sw.best_fit = cf;
          sw.best = cand;
        }
      }
      whale_fall(f, lb, ub, rho, fall_decay, i, gen, sw);
    }
    out.history.push_back(sw.best_fit);
  }
  out.best = sw.best;
  out.best_value = sw.best_fit;
  out.evaluations = sw.evaluations;
  return out;
}

optimizer_result run_bwo(const objective_fn& f, const Eigen::VectorXd& lb,
                         const Eigen::VectorXd& ub,
                         const optimizer_config& cfg) {
  rng gen(cfg.seed);
  const int phi = cfg.agents;
  const int tmax = cfg.iterations;
  swarm sw = init_swarm(f, lb, ub, cfg, gen);

  optimizer_result out;
  out.history.reserve(tmax + 1);
  out.history.push_back(sw.best_fit);

  for (int t = 0; t < tmax; ++t) {
    const double mu = gen.uniform() * (1.0 - 0.5 * t / tmax);
    const double rho = 0.1 - 0.05 * t / tmax;
    const double fall_decay = std::exp(-2.0 * rho * phi * t / tmax);
    for (int i = 0; i < phi; ++i) {
      const int r = other_index(gen, phi, i);
      Eigen::VectorXd cand;
      if (mu > 0.5) {
        cand = explore_candidate(sw.w, i, r, gen);
      } else {
        const double c3 = gen.uniform();
        const double c4 = gen.uniform();
        const double eta = gen.normal();
        const double zr = gen.normal();
        const double nu = gen.normal();
        const double levy = 0.1 * c4 * (1.0 - static_cast<double>(t) / tmax) *
                            (eta * zr / std::pow(std::abs(nu), 2.0 / 3.0));
        cand = c3 * sw.best - c4 * sw.w.row(i).transpose() +
               levy * (sw.w.row(r).transpose() - sw.w.row(i).transpose());
      }
      cand = clamp_box(std::move(cand), lb, ub);
      const double cf = f(cand);
      ++sw.evaluations;
      if (cf < sw.fit[i]) {
        sw.w.row(i) = cand.transpose();
        sw.fit[i] = cf;
        if (cf < sw.best_fit) {
          sw.best_fit = cf;
          sw.best = cand;
        }
      }
      whale_fall(f, lb, ub, rho, fall_decay, i, gen, sw);
    }
    out.history.push_back(sw.best_fit);
  }
  out.best = sw.best;
  out.best_value = sw.best_fit;
  out.evaluations = sw.evaluations;
  return out;
}

optimizer_result run_pso(const objective_fn& f, const Eigen::VectorXd& lb,
                         const Eigen::VectorXd& ub,
                         const optimizer_config& cfg) {
  rng gen(cfg.seed);
  const int s = static_cast<int>(lb.size());
  const int phi = cfg.agents;
  const int tmax = cfg.iterations;
  swarm sw = init_swarm(f, lb, ub, cfg, gen);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(phi, s);
  Eigen::MatrixXd pbest = sw.w;
  Eigen::VectorXd pfit = sw.fit;
  const double inertia = 0.7298;
  const double c_personal = 1.49618;
  const double c_global = 1.49618;
  const Eigen::VectorXd vmax = 0.2 * (ub - lb);

  optimizer_result out;
  out.history.reserve(tmax + 1);
  out.history.push_back(sw.best_fit);

  for (int t = 0; t < tmax; ++t) {
    for (int i = 0; i < phi; ++i) {
      Eigen::VectorXd r1(s), r2(s);
      for (int j = 0; j < s; ++j) r1[j] = gen.uniform();
      for (int j = 0; j < s; ++j) r2[j] = gen.uniform();
      for (int j = 0; j < s; ++j) {
        double vj = inertia * v(i, j) +
                    c_personal * r1[j] * (pbest(i, j) - sw.w(i, j)) +
                    c_global * r2[j] * (sw.best[j] - sw.w(i, j));
        if (vj > vmax[j]) vj = vmax[j];
        if (vj < -vmax[j]) vj = -vmax[j];
        v(i, j) = vj;
        double wj = sw.w(i, j) + vj;
        if (wj < lb[j]) wj = lb[j];
        if (wj > ub[j]) wj = ub[j];
        sw.w(i, j) = wj;
      }
      const double fv = f(sw.w.row(i).transpose());
      ++sw.evaluations;
      if (fv < pfit[i]) {
        pfit[i] = fv;
        pbest.row(i) = sw.w.row(i);
      }
      if (fv < sw.best_fit) {
        sw.best_fit = fv;
        sw.best = sw.w.row(i).transpose();
      }
    }
    out.history.push_back(sw.best_fit);
  }
  out.best = sw.best;
  out.best_value = sw.best_fit;
  out.evaluations = sw.evaluations;
  return out;
}

optimizer_result run_optimizer(const std::string& name, const objective_fn& f,
                               const Eigen::VectorXd& lb,
                               const Eigen::VectorXd& ub,
                               const optimizer_config& cfg) {
  if (name == "bwb") return run_bwb(f, lb, ub, cfg);
  if (name == "bwo") return run_bwo(f, lb, ub, cfg);
  if (name == "pso") return run_pso(f, lb, ub, cfg);
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

}  // namespace dsekit
