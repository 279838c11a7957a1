#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace pdd {

/// u_t = D u_xx + source(x, t, u) on [lo, hi] with Dirichlet data on both
/// ends.
struct ParabolicProblem1D {
  double lo = 0.0;
  double hi = 1.0;
  double diffusion = 1.0;
  std::function<double(double x, double t, double u)> source;
  std::function<double(double x)> initial;
  std::function<double(double t)> left_bc;
  std::function<double(double t)> right_bc;
  double horizon = 1.0;
};

struct ParabolicOptions {
  double dx = 1e-2;
  double dt = 1e-4;
  /// Picard stopping tolerance on the max-norm change between iterates.
  double tol = 1e-3;
  int max_picard = 50;
  /// Times at which the solution is stored, in addition to t = 0 and the
  /// horizon. Each is rounded to the nearest time step.
  std::vector<double> output_times;
  /// Tolerance for |left_bc(0) - initial(lo)| and the right analogue.
  double compatibility_tol = 1e-6;
};

/// Values on a tensor grid: rows follow axes[0] (time for parabolic
/// solutions, y for elliptic ones), columns follow axes[1] (x).
struct GridSolution {
  std::vector<double> row_axis;
  std::vector<double> col_axis;
  Eigen::MatrixXd values;
  double max_residual = 0.0;
  int iterations = 0;
};

/// Crank-Nicolson in time, centred second differences in space, and Picard
/// iteration on the source term every step. The source uses the trapezoidal
/// average of the old and the current iterate.
GridSolution solve_parabolic_1d(const ParabolicProblem1D& problem, const ParabolicOptions& options);

/// Linear elliptic problem
///   1/2 (a11 u_xx + 2 a12 u_xy + a22 u_yy) + b1 u_x + b2 u_y + c u + f = 0
/// on a rectangle with Dirichlet data g on all edges.
struct EllipticProblem2D {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  std::function<double(double, double)> a11, a12, a22;
  std::function<double(double, double)> b1, b2;
  std::function<double(double, double)> c;
  std::function<double(double, double)> f;
  std::function<double(double, double)> g;
};

struct EllipticOptions {
  double dx = 1.0 / 32;
  double dy = 1.0 / 32;
  double tol = 1e-8;
  int max_iterations = 20000;
  /// Optional Dirichlet data per edge overriding g: left (x = x_lo), right,
  /// bottom (y = y_lo), top. Each maps the coordinate along the edge to u.
  std::function<double(double)> left, right, bottom, top;
};

/// Second-order 9-point stencil (5-point when a12 = 0) with centred first
/// derivatives; BiCGSTAB with an incomplete-LU preconditioner.
GridSolution solve_elliptic_2d(const EllipticProblem2D& problem, const EllipticOptions& options);

}  // namespace pdd
