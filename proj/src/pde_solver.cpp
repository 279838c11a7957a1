#include "pdd/pde_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "pdd/error.hpp"

namespace pdd {
namespace {

// Constant tridiagonal system (sub = super = off, diagonal = diag) factored
// once and reused for every right-hand side.
class ConstantTridiagonal {
 public:
  ConstantTridiagonal(std::size_t n, double diag, double off) : off_(off), inv_(n), upper_(n) {
    double prev_upper = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double denom = diag - off * prev_upper;
      inv_[i] = 1.0 / denom;
      upper_[i] = off * inv_[i];
      prev_upper = upper_[i];
    }
  }

  void solve(std::vector<double>& rhs) const {
    const std::size_t n = rhs.size();
    if (n == 0) return;
    rhs[0] *= inv_[0];
    for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - off_ * rhs[i - 1]) * inv_[i];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_[i] * rhs[i + 1];
  }

 private:
  double off_;
  std::vector<double> inv_;
  std::vector<double> upper_;
};

}  // namespace

GridSolution solve_parabolic_1d(const ParabolicProblem1D& problem, const ParabolicOptions& options) {
  require(options.dx > 0.0 && options.dt > 0.0, ErrorKind::InvalidArgument, "mesh sizes must be positive");
  require(options.tol > 0.0, ErrorKind::InvalidArgument, "Picard tolerance must be positive");
  require(problem.hi > problem.lo && problem.horizon > 0.0 && problem.diffusion > 0.0,
          ErrorKind::InvalidArgument, "invalid parabolic problem");
  require(problem.initial && problem.left_bc && problem.right_bc, ErrorKind::MissingDatum,
          "initial and boundary data are required");

  const auto intervals = static_cast<std::size_t>(std::max(2.0, std::round((problem.hi - problem.lo) / options.dx)));
  const double h = (problem.hi - problem.lo) / static_cast<double>(intervals);
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(problem.horizon / options.dt)));
  const double k = problem.horizon / static_cast<double>(steps);
  const std::size_t m = intervals - 1;

  std::vector<double> x(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) x[i] = problem.lo + h * static_cast<double>(i);
  x.back() = problem.hi;

  const double left0 = problem.left_bc(0.0);
  const double right0 = problem.right_bc(0.0);
  require(std::abs(left0 - problem.initial(problem.lo)) <= options.compatibility_tol &&
              std::abs(right0 - problem.initial(problem.hi)) <= options.compatibility_tol,
          ErrorKind::InvalidArgument, "boundary data incompatible with the initial datum at t = 0");

  std::set<std::size_t> stored{0, steps};
  for (double t : options.output_times) {
    require(t >= 0.0 && t <= problem.horizon, ErrorKind::InvalidArgument, "output time outside [0, horizon]");
    stored.insert(static_cast<std::size_t>(std::llround(t / k)));
  }

  GridSolution out;
  out.col_axis = x;
  out.values.resize(static_cast<Eigen::Index>(stored.size()), static_cast<Eigen::Index>(intervals + 1));
  Eigen::Index next_row = 0;

  // u holds the full grid including the two boundary nodes.
  std::vector<double> u(intervals + 1), prev(intervals + 1), guess(m), rhs(m), base(m), src_old(m);
  for (std::size_t i = 0; i <= intervals; ++i) u[i] = problem.initial(x[i]);
  u.front() = left0;
  u.back() = right0;
  prev = u;

  auto store = [&](std::size_t step) {
    out.row_axis.push_back(step == steps ? problem.horizon : k * static_cast<double>(step));
    for (std::size_t i = 0; i <= intervals; ++i) out.values(next_row, static_cast<Eigen::Index>(i)) = u[i];
    ++next_row;
  };
  store(0);

  const double r = problem.diffusion * k / (h * h);
  const ConstantTridiagonal system(m, 1.0 + r, -0.5 * r);
  const bool has_source = static_cast<bool>(problem.source);

  for (std::size_t n = 0; n < steps; ++n) {
    const double t_old = k * static_cast<double>(n);
    const double t_new = (n + 1 == steps) ? problem.horizon : k * static_cast<double>(n + 1);
    const double left = problem.left_bc(t_new);
    const double right = problem.right_bc(t_new);

    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = j + 1;
      base[j] = (1.0 - r) * u[i] + 0.5 * r * (u[i - 1] + u[i + 1]);
      if (has_source) base[j] += 0.5 * k * problem.source(x[i], t_old, u[i]);
    }
    base[0] += 0.5 * r * left;
    base[m - 1] += 0.5 * r * right;

    if (!has_source) {
      rhs = base;
      system.solve(rhs);
      guess = rhs;
    } else {
      // Linear extrapolation from the last two levels as the first iterate.
      for (std::size_t j = 0; j < m; ++j) guess[j] = n == 0 ? u[j + 1] : 2.0 * u[j + 1] - prev[j + 1];
      double change = 0.0;
      int iteration = 0;
      do {
        require(iteration < options.max_picard, ErrorKind::Divergence,
                "Picard iteration did not converge at step " + std::to_string(n + 1) + " (t = " +
                    std::to_string(t_new) + "), last change " + std::to_string(change));
        for (std::size_t j = 0; j < m; ++j) rhs[j] = base[j] + 0.5 * k * problem.source(x[j + 1], t_new, guess[j]);
        system.solve(rhs);
        change = 0.0;
        for (std::size_t j = 0; j < m; ++j) change = std::max(change, std::abs(rhs[j] - guess[j]));
        require(std::isfinite(change), ErrorKind::Divergence,
                "non-finite Picard iterate at step " + std::to_string(n + 1));
        guess.swap(rhs);
        ++iteration;
      } while (change > options.tol);
      out.max_residual = std::max(out.max_residual, change);
      out.iterations = std::max(out.iterations, iteration);
    }

    prev.swap(u);
    u.front() = left;
    u.back() = right;
    for (std::size_t j = 0; j < m; ++j) u[j + 1] = guess[j];
    if (stored.count(n + 1)) store(n + 1);
  }
  return out;
}

GridSolution solve_elliptic_2d(const EllipticProblem2D& problem, const EllipticOptions& options) {
  require(options.dx > 0.0 && options.dy > 0.0, ErrorKind::InvalidArgument, "mesh sizes must be positive");
  require(problem.x_hi > problem.x_lo && problem.y_hi > problem.y_lo, ErrorKind::InvalidArgument,
          "invalid rectangle");
  require(problem.a11 && problem.a22, ErrorKind::InvalidArgument, "diffusion coefficients are required");

  const int nx = std::max(2, static_cast<int>(std::lround((problem.x_hi - problem.x_lo) / options.dx)));
  const int ny = std::max(2, static_cast<int>(std::lround((problem.y_hi - problem.y_lo) / options.dy)));
  const double hx = (problem.x_hi - problem.x_lo) / nx;
  const double hy = (problem.y_hi - problem.y_lo) / ny;

  GridSolution out;
  out.col_axis.resize(static_cast<std::size_t>(nx + 1));
  out.row_axis.resize(static_cast<std::size_t>(ny + 1));
  for (int i = 0; i <= nx; ++i) out.col_axis[static_cast<std::size_t>(i)] = problem.x_lo + hx * i;
  for (int j = 0; j <= ny; ++j) out.row_axis[static_cast<std::size_t>(j)] = problem.y_lo + hy * j;
  out.col_axis.back() = problem.x_hi;
  out.row_axis.back() = problem.y_hi;
  const auto& xs = out.col_axis;
  const auto& ys = out.row_axis;

  // Boundary values first; edge overrides win over g.
  out.values = Eigen::MatrixXd::Zero(ny + 1, nx + 1);
  auto boundary = [&](int i, int j) {
    const double x = xs[static_cast<std::size_t>(i)];
    const double y = ys[static_cast<std::size_t>(j)];
    if (i == 0 && options.left) return options.left(y);
    if (i == nx && options.right) return options.right(y);
    if (j == 0 && options.bottom) return options.bottom(x);
    if (j == ny && options.top) return options.top(x);
    require(static_cast<bool>(problem.g), ErrorKind::MissingDatum, "Dirichlet datum missing");
    return problem.g(x, y);
  };
  for (int i = 0; i <= nx; ++i) {
    out.values(0, i) = boundary(i, 0);
    out.values(ny, i) = boundary(i, ny);
  }
  for (int j = 1; j < ny; ++j) {
    out.values(j, 0) = boundary(0, j);
    out.values(j, nx) = boundary(nx, j);
  }

  const int mx = nx - 1;
  const int my = ny - 1;
  const int unknowns = mx * my;
  auto index = [mx](int i, int j) { return (j - 1) * mx + (i - 1); };
  auto value_or = [](const std::function<double(double, double)>& fn, double x, double y) {
    return fn ? fn(x, y) : 0.0;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 9);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);

  for (int j = 1; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const double x = xs[static_cast<std::size_t>(i)];
      const double y = ys[static_cast<std::size_t>(j)];
      const double a11 = problem.a11(x, y);
      const double a22 = problem.a22(x, y);
      const double a12 = value_or(problem.a12, x, y);
      const double b1 = value_or(problem.b1, x, y);
      const double b2 = value_or(problem.b2, x, y);
      const double c = value_or(problem.c, x, y);
      const int row = index(i, j);
      rhs[row] = -value_or(problem.f, x, y);

      auto add = [&](int ii, int jj, double w) {
        if (w == 0.0) return;
        if (ii == 0 || ii == nx || jj == 0 || jj == ny) {
          rhs[row] -= w * out.values(jj, ii);
        } else {
          triplets.emplace_back(row, index(ii, jj), w);
        }
      };
      const double wx = 0.5 * a11 / (hx * hx);
      const double wy = 0.5 * a22 / (hy * hy);
      add(i, j, -2.0 * wx - 2.0 * wy + c);
      add(i - 1, j, wx - 0.5 * b1 / hx);
      add(i + 1, j, wx + 0.5 * b1 / hx);
      add(i, j - 1, wy - 0.5 * b2 / hy);
      add(i, j + 1, wy + 0.5 * b2 / hy);
      if (a12 != 0.0) {
        const double wxy = a12 / (4.0 * hx * hy);
        add(i + 1, j + 1, wxy);
        add(i - 1, j - 1, wxy);
        add(i + 1, j - 1, -wxy);
        add(i - 1, j + 1, -wxy);
      }
    }
  }

  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix(unknowns, unknowns);
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::IncompleteLUT<double>> solver;
  solver.setTolerance(options.tol);
  solver.setMaxIterations(options.max_iterations);
  solver.compute(matrix);
  require(solver.info() == Eigen::Success, ErrorKind::Divergence, "preconditioner factorization failed");
  const Eigen::VectorXd u = solver.solve(rhs);
  require(solver.info() == Eigen::Success && u.allFinite(), ErrorKind::Divergence,
          "BiCGSTAB did not reach the residual tolerance (relative residual " + std::to_string(solver.error()) +
              " after " + std::to_string(solver.iterations()) + " iterations)");
  out.max_residual = solver.error();
  out.iterations = static_cast<int>(solver.iterations());

  for (int j = 1; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) out.values(j, i) = u[index(i, j)];
  }
  return out;
}

}  // namespace pdd
