#include "pdd/problems.hpp"

#include <cmath>
#include <numbers>

namespace pdd {

double kpp_exact(double x, double t) {
  const double e = std::exp(x / std::sqrt(6.0) - 5.0 * t / 6.0);
  const double w = 1.0 / (1.0 + e);
  return 1.0 - w * w;
}

BranchingSpec make_kpp_branching(const KppSpec& kpp, int prune_limit, double step) {
  BranchingSpec spec;
  spec.mode = BranchingMode::Classical;
  spec.intensity = 1.0;
  spec.alpha = {BoundedField::constant(0.0), BoundedField::constant(0.0), BoundedField::constant(1.0)};
  spec.offspring_law = {0.0, 0.0, 1.0};
  spec.terminal = BoundedPayoff{[](const Point& x) { return kpp_exact(x[0], 0.0); }, 1.0};
  spec.dirichlet = [](const Point& x, double t) { return kpp_exact(x[0], t); };
  spec.domain = BoxDomain::interval(kpp.lo, kpp.hi);
  spec.coeffs = DiffusionCoefficients::brownian(1, std::numbers::sqrt2);
  spec.horizon = kpp.horizon;
  spec.prune_limit = prune_limit;
  spec.step = step;
  return spec;
}

ParabolicProblem1D make_kpp_parabolic(const KppSpec& kpp) {
  ParabolicProblem1D problem;
  problem.lo = kpp.lo;
  problem.hi = kpp.hi;
  problem.diffusion = 1.0;
  problem.source = [](double, double, double u) { return u * u - u; };
  problem.initial = [](double x) { return kpp_exact(x, 0.0); };
  problem.left_bc = [lo = kpp.lo](double t) { return kpp_exact(lo, t); };
  problem.right_bc = [hi = kpp.hi](double t) { return kpp_exact(hi, t); };
  problem.horizon = kpp.horizon;
  return problem;
}

double manufactured_solution(double x, double y) {
  return 2.0 * std::cos(2.0 * (y - 2.0) * x) + std::sin(3.0 * (x - 2.0) * y) + 3.1;
}

namespace {

double manufactured_beta(double x, double y) { return std::cos(x + y) / (1.1 + std::sin(x + y)); }
double manufactured_gamma(double x, double y) { return (x * x + y * y) / (1.1 + std::sin(x + y)); }

}  // namespace

double manufactured_source(double x, double y) {
  const double a = 2.0 * x * (y - 2.0);
  const double b = 3.0 * y * (x - 2.0);
  const double laplacian = -8.0 * x * x * std::cos(a) - 8.0 * (y - 2.0) * (y - 2.0) * std::cos(a) -
                           9.0 * y * y * std::sin(b) - 9.0 * (x - 2.0) * (x - 2.0) * std::sin(b);
  const double ux = -4.0 * (y - 2.0) * std::sin(a) + 3.0 * y * std::cos(b);
  const double uy = -4.0 * x * std::sin(a) + 3.0 * (x - 2.0) * std::cos(b);
  return -(laplacian + manufactured_beta(x, y) * (ux + uy) - manufactured_gamma(x, y) * manufactured_solution(x, y));
}

LinearBvpSpec make_manufactured_bvp() {
  LinearBvpSpec spec;
  spec.domain = BoxDomain::rectangle(0.0, 1.0, 0.0, 1.0);
  spec.coeffs = DiffusionCoefficients::brownian(2, std::numbers::sqrt2);
  spec.coeffs.drift = [](const Point& x, double) {
    const double beta = manufactured_beta(x[0], x[1]);
    Point b(2);
    b << beta, beta;
    return b;
  };
  spec.c = [](const Point& x, double) { return -manufactured_gamma(x[0], x[1]); };
  spec.f = [](const Point& x, double) { return manufactured_source(x[0], x[1]); };
  spec.dirichlet = [](const Point& x, double) { return manufactured_solution(x[0], x[1]); };
  spec.horizon = kEllipticHorizon;
  return spec;
}

EllipticProblem2D make_manufactured_elliptic() {
  EllipticProblem2D problem;
  problem.a11 = [](double, double) { return 2.0; };
  problem.a22 = [](double, double) { return 2.0; };
  problem.b1 = manufactured_beta;
  problem.b2 = manufactured_beta;
  problem.c = [](double x, double y) { return -manufactured_gamma(x, y); };
  problem.f = manufactured_source;
  problem.g = manufactured_solution;
  return problem;
}

double cva_payoff(const CvaSpec& cva, double x) { return std::tanh(x / cva.payoff_scale); }

double cva_nonlinearity(const CvaSpec& cva, double v) {
  double acc = 0.0;
  for (auto it = cva.polynomial.rbegin(); it != cva.polynomial.rend(); ++it) acc = acc * v + *it;
  return acc;
}

double cva_far_field(const CvaSpec& cva, double v0, double t) {
  if (t <= 0.0) return v0;
  const auto steps = static_cast<int>(std::ceil(2000.0 * t));
  const double h = t / steps;
  auto rate = [&](double v) { return cva.intensity * (cva_nonlinearity(cva, v) - v); };
  double v = v0;
  for (int n = 0; n < steps; ++n) {
    const double k1 = rate(v);
    const double k2 = rate(v + 0.5 * h * k1);
    const double k3 = rate(v + 0.5 * h * k2);
    const double k4 = rate(v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return v;
}

BranchingSpec make_cva_branching(const CvaSpec& cva, int prune_limit, double step) {
  BranchingSpec spec;
  spec.mode = BranchingMode::Marked;
  spec.intensity = cva.intensity;
  for (double a : cva.polynomial) spec.alpha.push_back(BoundedField::constant(a));
  spec.offspring_law = uniform_offspring_law(spec.alpha);
  spec.terminal = BoundedPayoff{[cva](const Point& x) { return cva_payoff(cva, x[0]); }, 1.0};
  spec.coeffs = DiffusionCoefficients::brownian(1, cva.sigma);
  spec.horizon = cva.horizon;
  spec.prune_limit = prune_limit;
  spec.step = step;
  return spec;
}

ParabolicProblem1D make_cva_parabolic(const CvaSpec& cva) {
  ParabolicProblem1D problem;
  problem.lo = cva.lo;
  problem.hi = cva.hi;
  problem.diffusion = 0.5 * cva.sigma * cva.sigma;
  problem.source = [cva](double, double, double u) { return cva.intensity * (cva_nonlinearity(cva, u) - u); };
  problem.initial = [cva](double x) { return cva_payoff(cva, x); };
  const double left0 = cva_payoff(cva, cva.lo);
  const double right0 = cva_payoff(cva, cva.hi);
  problem.left_bc = [cva, left0](double t) { return cva_far_field(cva, left0, t); };
  problem.right_bc = [cva, right0](double t) { return cva_far_field(cva, right0, t); };
  problem.horizon = cva.horizon;
  return problem;
}

}  // namespace pdd
