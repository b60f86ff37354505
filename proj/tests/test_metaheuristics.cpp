#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dsekit/benchmarks.hpp"
#include "dsekit/metaheuristics.hpp"

using dsekit::optimizer_config;
using dsekit::optimizer_result;
using dsekit::run_bwb;
using dsekit::run_bwo;
using dsekit::run_optimizer;
using dsekit::run_pso;

namespace {

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

Eigen::VectorXd box(int dim, double v) {
  return Eigen::VectorXd::Constant(dim, v);
}

}  // namespace

TEST_CASE("hybrid optimizer drives the sphere to numerical zero") {
  optimizer_config cfg;
  cfg.agents = 20;
  cfg.iterations = 200;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    cfg.seed = seed;
    const optimizer_result r = run_bwb(sphere, box(10, -100.0), box(10, 100.0), cfg);
    CHECK(r.best_value < 1e-10);
    CHECK(r.best.cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("particle swarm solves a small sphere") {
  optimizer_config cfg;
  cfg.agents = 20;
  cfg.iterations = 300;
  cfg.seed = 7;
  const optimizer_result r = run_pso(sphere, box(5, -100.0), box(5, 100.0), cfg);
  CHECK(r.best_value < 1e-10);
}

TEST_CASE("whale-style baseline improves monotonically over its start") {
  optimizer_config cfg;
  cfg.agents = 20;
  cfg.iterations = 150;
  cfg.seed = 5;
  const optimizer_result r = run_bwo(sphere, box(8, -50.0), box(8, 50.0), cfg);
  REQUIRE(r.history.size() == 151);
  for (std::size_t i = 1; i < r.history.size(); ++i)
    CHECK(r.history[i] <= r.history[i - 1]);
  CHECK(r.best_value < r.history.front());
  CHECK(r.best_value == doctest::Approx(r.history.back()));
}

TEST_CASE("identical seeds reproduce identical searches") {
  optimizer_config cfg;
  cfg.agents = 12;
  cfg.iterations = 60;
  cfg.seed = 99;
  for (const char* name : {"bwb", "bwo", "pso"}) {
    const optimizer_result a =
        run_optimizer(name, sphere, box(6, -10.0), box(6, 10.0), cfg);
    const optimizer_result b =
        run_optimizer(name, sphere, box(6, -10.0), box(6, 10.0), cfg);
    CHECK(a.best_value == b.best_value);
    CHECK((a.best.array() == b.best.array()).all());
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i)
      CHECK(a.history[i] == b.history[i]);
    CHECK(a.evaluations == b.evaluations);

    cfg.seed = 100;
    const optimizer_result c =
        run_optimizer(name, sphere, box(6, -10.0), box(6, 10.0), cfg);
    cfg.seed = 99;
    CHECK_FALSE((c.best.array() == a.best.array()).all());
  }
}

TEST_CASE("iterates never leave the search box") {
  // Unconstrained minimum far outside the box: the best point must sit inside
  // (and will hug the nearest face).
  const auto shifted = [](const Eigen::VectorXd& x) {
    return (x - Eigen::VectorXd::Constant(x.size(), 10.0)).squaredNorm();
  };
  optimizer_config cfg;
  cfg.agents = 15;
  cfg.iterations = 100;
  cfg.seed = 3;
  for (const char* name : {"bwb", "bwo", "pso"}) {
    const optimizer_result r =
        run_optimizer(name, shifted, box(4, -1.0), box(4, 1.0), cfg);
    for (int j = 0; j < 4; ++j) {
      CHECK(r.best[j] >= -1.0);
      CHECK(r.best[j] <= 1.0);
    }
    CHECK(r.best_value == doctest::Approx(4.0 * 81.0).epsilon(0.05));
  }
}

TEST_CASE("warm starts are honored from the first evaluation") {
  optimizer_config cfg;
  cfg.agents = 10;
  cfg.iterations = 5;
  cfg.seed = 21;
  cfg.warm_start = Eigen::VectorXd::Zero(6);
  const optimizer_result r = run_bwb(sphere, box(6, -10.0), box(6, 10.0), cfg);
  CHECK(r.history.front() == 0.0);  // the seed agent already sits at the optimum
  CHECK(r.best_value == 0.0);

  // Warm starts outside the box are clamped onto it.
  cfg.warm_start = Eigen::VectorXd::Constant(6, 100.0);
  const optimizer_result c = run_bwb(sphere, box(6, -10.0), box(6, 10.0), cfg);
  CHECK(c.history.front() <= 6.0 * 100.0 + 1e-12);
}

TEST_CASE("invalid configurations are rejected") {
  optimizer_config cfg;
  cfg.agents = 1;
  CHECK_THROWS(run_bwb(sphere, box(3, -1.0), box(3, 1.0), cfg));
  cfg.agents = 5;
  cfg.iterations = 0;
  CHECK_THROWS(run_pso(sphere, box(3, -1.0), box(3, 1.0), cfg));
  cfg.iterations = 10;
  CHECK_THROWS(run_bwo(sphere, box(3, 1.0), box(3, -1.0), cfg));
  CHECK_THROWS(run_bwb(sphere, box(3, -1.0), box(2, 1.0), cfg));
  cfg.warm_start = Eigen::VectorXd::Zero(2);
  CHECK_THROWS(run_bwb(sphere, box(3, -1.0), box(3, 1.0), cfg));
  cfg.warm_start.reset();
  CHECK_THROWS(run_optimizer("annealing", sphere, box(3, -1.0), box(3, 1.0), cfg));
}

TEST_CASE("history tracks the running best across an awkward landscape") {
  // Valley-shaped coupling between coordinates; slow to descend, good at
  // exposing monotonicity bugs in the incumbent bookkeeping.
  const auto valley = [](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (int i = 0; i + 1 < x.size(); ++i) {
      const double a = x[i + 1] - x[i] * x[i];
      const double b = 1.0 - x[i];
      s += 100.0 * a * a + b * b;
    }
    return s;
  };
  optimizer_config cfg;
  cfg.agents = 20;
  cfg.iterations = 120;
  cfg.seed = 17;
  const optimizer_result r =
      run_bwb(valley, box(8, -5.0), box(8, 5.0), cfg);
  REQUIRE(r.history.size() == 121);
  for (std::size_t i = 1; i < r.history.size(); ++i)
    CHECK(r.history[i] <= r.history[i - 1]);
  CHECK(r.evaluations >= 20 * 121L);
}
