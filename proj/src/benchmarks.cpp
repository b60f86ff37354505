#include "dsekit/benchmarks.hpp"

#include <cmath>
#include <stdexcept>

namespace dsekit {

namespace {

constexpr double pi = 3.14159265358979323846;

using vec = Eigen::VectorXd;

double f1_sphere(const vec& x) { return x.squaredNorm(); }

double f2_schwefel222(const vec& x) {
  const vec a = x.cwiseAbs();
  return a.sum() + a.prod();
}

double f3_schwefel12(const vec& x) {
  double total = 0.0, run = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    run += x[i];
    total += run * run;
  }
  return total;
}

double f4_schwefel221(const vec& x) { return x.cwiseAbs().maxCoeff(); }

double f5_rosenbrock(const vec& x) {
  double s = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = x[i] - 1.0;
    s += 100.0 * a * a + b * b;
  }
  return s;
}

double f6_step(const vec& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double y = std::floor(x[i] + 0.5);
    s += y * y;
  }
  return s;
}

double f7_quartic(const vec& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    const double x2 = x[i] * x[i];
    s += (i + 1) * x2 * x2;
  }
  return s;
}

double f8_schwefel(const vec& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i)
    s += -x[i] * std::sin(std::sqrt(std::abs(x[i])));
  return s;
}

double f9_rastrigin(const vec& x) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i)
    s += x[i] * x[i] - 10.0 * std::cos(2.0 * pi * x[i]) + 10.0;
  return s;
}

double f10_ackley(const vec& x) {
  const double n = static_cast<double>(x.size());
  double sq = 0.0, cs = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    sq += x[i] * x[i];
    cs += std::cos(2.0 * pi * x[i]);
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / n)) - std::exp(cs / n) + 20.0 +
         std::exp(1.0);
}

double f11_griewank(const vec& x) {
  double sq = 0.0, pr = 1.0;
  for (int i = 0; i < x.size(); ++i) {
    sq += x[i] * x[i];
    pr *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
  }
  return sq / 4000.0 - pr + 1.0;
}

double penalty_u(double x, double a, double k, double m) {
  if (x > a) return k * std::pow(x - a, m);
  if (x < -a) return k * std::pow(-x - a, m);
  return 0.0;
}

double f12_penalized1(const vec& x) {
  const int n = static_cast<int>(x.size());
  auto y = [&](int i) { return 1.0 + (x[i] + 1.0) / 4.0; };
  double s = 10.0 * std::pow(std::sin(pi * y(0)), 2.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double d = y(i) - 1.0;
    s += d * d * (1.0 + 10.0 * std::pow(std::sin(pi * y(i + 1)), 2.0));
  }
  const double dl = y(n - 1) - 1.0;
  s += dl * dl;
  double pen = 0.0;
  for (int i = 0; i < n; ++i) pen += penalty_u(x[i], 10.0, 100.0, 4.0);
  return pi / n * s + pen;
}

double f13_penalized2(const vec& x) {
  const int n = static_cast<int>(x.size());
  double s = std::pow(std::sin(3.0 * pi * x[0]), 2.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double d = x[i] - 1.0;
    s += d * d * (1.0 + std::pow(std::sin(3.0 * pi * x[i + 1]), 2.0));
  }
  const double dl = x[n - 1] - 1.0;
  s += dl * dl * (1.0 + std::pow(std::sin(2.0 * pi * x[n - 1]), 2.0));
  double pen = 0.0;
  for (int i = 0; i < n; ++i) pen += penalty_u(x[i], 5.0, 100.0, 4.0);
  return 0.1 * s + pen;
}

double f14_foxholes(const vec& x) {
  static const double a0[25] = {-32, -16, 0,   16,  32,  -32, -16, 0,  16,
                                32,  -32, -16, 0,   16,  32,  -32, -16, 0,
                                16,  32,  -32, -16, 0,   16,  32};
  static const double a1[25] = {-32, -32, -32, -32, -32, -16, -16, -16, -16,
                                -16, 0,   0,   0,   0,   0,   16,  16,  16,
                                16,  16,  32,  32,  32,  32,  32};
  double s = 1.0 / 500.0;
  for (int j = 0; j < 25; ++j) {
    const double d =
        std::pow(x[0] - a0[j], 6.0) + std::pow(x[1] - a1[j], 6.0);
    s += 1.0 / (j + 1 + d);
  }
  return 1.0 / s;
}

double f15_kowalik(const vec& x) {
  static const double a[11] = {0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627,
                               0.0456, 0.0342, 0.0323, 0.0235, 0.0246};
  static const double binv[11] = {0.25, 0.5, 1, 2, 4, 6, 8, 10, 12, 14, 16};
  double s = 0.0;
  for (int j = 0; j < 11; ++j) {
    const double b = 1.0 / binv[j];
    const double r =
        a[j] - x[0] * (b * b + b * x[1]) / (b * b + b * x[2] + x[3]);
    s += r * r;
  }
  return s;
}

double f16_camel(const vec& x) {
  const double x1 = x[0], x2 = x[1];
  return 4.0 * x1 * x1 - 2.1 * std::pow(x1, 4.0) + std::pow(x1, 6.0) / 3.0 +
         x1 * x2 - 4.0 * x2 * x2 + 4.0 * std::pow(x2, 4.0);
}

double f17_branin(const vec& x) {
  const double x1 = x[0], x2 = x[1];
  const double t = x2 - 5.1 / (4.0 * pi * pi) * x1 * x1 + 5.0 / pi * x1 - 6.0;
  return t * t + 10.0 * (1.0 - 1.0 / (8.0 * pi)) * std::cos(x1) + 10.0;
}

double f18_goldstein(const vec& x) {
  const double x1 = x[0], x2 = x[1];
  const double p = 1.0 + std::pow(x1 + x2 + 1.0, 2.0) *
                             (19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 +
                              6.0 * x1 * x2 + 3.0 * x2 * x2);
  const double q = 30.0 + std::pow(2.0 * x1 - 3.0 * x2, 2.0) *
                              (18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 -
                               36.0 * x1 * x2 + 27.0 * x2 * x2);
  return p * q;
}

const double h3_a[4][3] = {{3, 10, 30}, {0.1, 10, 35}, {3, 10, 30}, {0.1, 10, 35}};
const double hart_c[4] = {1, 1.2, 3, 3.2};
const double h3_p[4][3] = {{0.3689, 0.1170, 0.2673},
                           {0.4699, 0.4387, 0.7470},
                           {0.1091, 0.8732, 0.5547},
                           {0.0381, 0.5743, 0.8828}};

double f19_hartman3(const vec& x) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double d = x[j] - h3_p[i][j];
      e += h3_a[i][j] * d * d;
    }
    s -= hart_c[i] * std::exp(-e);
  }
  return s;
}

const double h6_a[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                           {0.05, 10, 17, 0.1, 8, 14},
                           {3, 3.5, 1.7, 10, 17, 8},
                           {17, 8, 0.05, 10, 0.1, 14}};
const double h6_p[4][6] = {
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

double f20_hartman6(const vec& x) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double d = x[j] - h6_p[i][j];
      e += h6_a[i][j] * d * d;
    }
    s -= hart_c[i] * std::exp(-e);
  }
  return s;
}

const double sh_a[10][4] = {{4, 4, 4, 4}, {1, 1, 1, 1}, {8, 8, 8, 8},
                            {6, 6, 6, 6}, {3, 7, 3, 7}, {2, 9, 2, 9},
                            {5, 5, 3, 3}, {8, 1, 8, 1}, {6, 2, 6, 2},
                            {7, 3.6, 7, 3.6}};
const double sh_c[10] = {0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5};

double shekel(const vec& x, int m) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    double d = sh_c[i];
    for (int j = 0; j < 4; ++j) {
      const double t = x[j] - sh_a[i][j];
      d += t * t;
    }
    s -= 1.0 / d;
  }
  return s;
}

benchmark_function uniform_box(const char* name, int dim, double lo, double hi,
                               std::function<double(const vec&)> f,
                               double known_min) {
  benchmark_function b;
  b.name = name;
  b.dim = dim;
  b.lower = vec::Constant(dim, lo);
  b.upper = vec::Constant(dim, hi);
  b.f = std::move(f);
  b.known_min = known_min;
  return b;
}

std::vector<benchmark_function> make_suite() {
  std::vector<benchmark_function> s;
  s.push_back(uniform_box("F1", 30, -100, 100, f1_sphere, 0.0));
  s.push_back(uniform_box("F2", 30, -10, 10, f2_schwefel222, 0.0));
  s.push_back(uniform_box("F3", 30, -100, 100, f3_schwefel12, 0.0));
  s.push_back(uniform_box("F4", 30, -100, 100, f4_schwefel221, 0.0));
  s.push_back(uniform_box("F5", 30, -30, 30, f5_rosenbrock, 0.0));
  s.push_back(uniform_box("F6", 30, -100, 100, f6_step, 0.0));
  s.push_back(uniform_box("F7", 30, -1.28, 1.28, f7_quartic, 0.0));
  s.push_back(uniform_box("F8", 30, -500, 500, f8_schwefel, -12569.4866181730));
  s.push_back(uniform_box("F9", 30, -5.12, 5.12, f9_rastrigin, 0.0));
  s.push_back(uniform_box("F10", 30, -32, 32, f10_ackley, 0.0));
  s.push_back(uniform_box("F11", 30, -600, 600, f11_griewank, 0.0));
  s.push_back(uniform_box("F12", 30, -50, 50, f12_penalized1, 0.0));
  s.push_back(uniform_box("F13", 30, -50, 50, f13_penalized2, 0.0));
  s.push_back(uniform_box("F14", 2, -65.536, 65.536, f14_foxholes, 0.998003838));
  s.push_back(uniform_box("F15", 4, -5, 5, f15_kowalik, 3.0749e-4));
  s.push_back(uniform_box("F16", 2, -5, 5, f16_camel, -1.0316285));
  {
    benchmark_function b;
    b.name = "F17";
    b.dim = 2;
    b.lower.resize(2);
    b.upper.resize(2);
    b.lower << -5.0, 0.0;
    b.upper << 10.0, 15.0;
    b.f = f17_branin;
    b.known_min = 0.397887;
    s.push_back(std::move(b));
  }
  s.push_back(uniform_box("F18", 2, -2, 2, f18_goldstein, 3.0));
  s.push_back(uniform_box("F19", 3, 0, 1, f19_hartman3, -3.8627821));
  s.push_back(uniform_box("F20", 6, 0, 1, f20_hartman6, -3.3223680));
  s.push_back(uniform_box("F21", 4, 0, 10, [](const vec& x) { return shekel(x, 5); },
                          -10.1532));
  s.push_back(uniform_box("F22", 4, 0, 10, [](const vec& x) { return shekel(x, 7); },
                          -10.4029));
  s.push_back(uniform_box("F23", 4, 0, 10,
                          [](const vec& x) { return shekel(x, 10); }, -10.5364));
  return s;
}

}  // namespace

const std::vector<benchmark_function>& benchmark_suite() {
  static const std::vector<benchmark_function> suite = make_suite();
  return suite;
}

const benchmark_function& benchmark_by_name(const std::string& name) {
  for (const auto& b : benchmark_suite())
    if (b.name == name) return b;
  throw std::invalid_argument("unknown benchmark function '" + name + "'");
}

}  // namespace dsekit
