#pragma once

#include <array>
#include <vector>

#include "pdd/branching.hpp"
#include "pdd/feynman_kac.hpp"
#include "pdd/pde_solver.hpp"

namespace pdd {

// --- KPP: u_t = u_xx - u (1 - u), travelling-wave initial datum ------------

/// u(x, t) = 1 - (1 + exp(x / sqrt(6) - 5 t / 6))^-2.
double kpp_exact(double x, double t);

struct KppSpec {
  double lo = -2000.0;
  double hi = 2000.0;
  double horizon = 1.0;
};

/// Binary branching at rate 1 with driver X = x + sqrt(2) W (generator
/// d^2/dx^2), psi = kpp_exact(., 0) and the closed form on the boundary.
BranchingSpec make_kpp_branching(const KppSpec& kpp, int prune_limit, double step);
ParabolicProblem1D make_kpp_parabolic(const KppSpec& kpp);

// --- Elliptic manufactured problem on the unit square ------------------------

/// u = 2 cos(2 (y - 2) x) + sin(3 (x - 2) y) + 3.1.
double manufactured_solution(double x, double y);

/// f such that lap u + beta (u_x + u_y) - gamma u + f = 0 with
/// beta = cos(x + y) / (1.1 + sin(x + y)), gamma = (x^2 + y^2) / (1.1 + sin(x + y)).
double manufactured_source(double x, double y);

LinearBvpSpec make_manufactured_bvp();
EllipticProblem2D make_manufactured_elliptic();

// --- Rescaled CVA PDE ---------------------------------------------------------

/// Coefficients of the degree-4 approximation of max(v, 0) used for the CVA
/// nonlinearity.
inline constexpr std::array<double, 5> kCvaPolynomial{0.0586, 0.5, 0.8199, 0.0, -0.4095};

/// v_t = sigma^2 / 2 v_xx + c (F(v) - v), v(x, 0) = tanh(x / payoff_scale),
/// in time-to-maturity. F is the polynomial above.
struct CvaSpec {
  double intensity = 1.0;
  double sigma = 1.0;
  double horizon = 0.25;
  double payoff_scale = 1.0;
  double lo = -8.0;
  double hi = 8.0;
  std::vector<double> polynomial{kCvaPolynomial.begin(), kCvaPolynomial.end()};
};

double cva_payoff(const CvaSpec& cva, double x);
double cva_nonlinearity(const CvaSpec& cva, double v);
/// Spatially constant solution started from v0 (dv/dt = c (F(v) - v)), used
/// as far-field Dirichlet data. Classical RK4 with 2000 steps per unit time.
double cva_far_field(const CvaSpec& cva, double v0, double t);

BranchingSpec make_cva_branching(const CvaSpec& cva, int prune_limit, double step);
ParabolicProblem1D make_cva_parabolic(const CvaSpec& cva);

}  // namespace pdd
