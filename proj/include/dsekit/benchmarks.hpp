#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace dsekit {

// One entry of the classical 23-function optimizer test suite: F1-F13 are
// high-dimensional unimodal/multimodal families, F14-F23 fixed-dimension
// multimodal problems.
struct benchmark_function {
  std::string name;
  int dim = 0;
  Eigen::VectorXd lower, upper;
  std::function<double(const Eigen::VectorXd&)> f;
  double known_min = 0.0;  // canonical optimum value, for reporting
};

const std::vector<benchmark_function>& benchmark_suite();

// Lookup by name ("F1".."F23"); throws on unknown names.
const benchmark_function& benchmark_by_name(const std::string& name);

}  // namespace dsekit
