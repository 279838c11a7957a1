#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdd/branching.hpp"
#include "pdd/feynman_kac.hpp"
#include "pdd/geometry.hpp"
#include "pdd/pde_solver.hpp"
#include "pdd/polynomial.hpp"
#include "pdd/problems.hpp"

namespace pdd {

/// A linear elliptic problem in its two forms: the stochastic one used for
/// interface nodes and the operator form handed to the grid solver. Only
/// 2D rectangles are supported by the pipeline.
struct LinearBvpProblem {
  LinearBvpSpec stochastic;
  EllipticProblem2D deterministic;
  /// Closed-form solution, when known, for the error table.
  std::function<double(double, double)> exact;
};

LinearBvpProblem make_manufactured_problem();

using ProblemSpec = std::variant<LinearBvpProblem, KppSpec, CvaSpec>;

struct PddConfig {
  ProblemSpec problem = KppSpec{};
  int axis = 0;
  int subdomains = 4;
  /// Interface levels per cut: time levels for parabolic problems, points
  /// along the cut line for elliptic ones.
  int levels = 11;
  long long samples = 100000;
  /// Euler step of the path simulation (largest driver step for branching).
  double mc_dt = 0.05;
  std::optional<double> target_std_error;
  long long max_samples = 10'000'000;
  std::optional<int> degree;
  double solver_dx = 1e-2;
  double solver_dy = 1.0 / 32;
  double solver_dt = 1e-4;
  double picard_tol = 1e-3;
  double elliptic_tol = 1e-10;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  /// Virtual processors of the idealized timing model; defaults to p.
  std::optional<std::size_t> model_processors;
  int prune_limit = 1000;
  /// Spatial window of the error table.
  double error_lo = -5.0;
  double error_hi = 5.0;

  bool elliptic() const { return std::holds_alternative<LinearBvpProblem>(problem); }
  std::string problem_name() const;
  int interpolation_degree() const { return degree.value_or(std::min(4, levels - 1)); }
  std::size_t processors() const { return model_processors.value_or(static_cast<std::size_t>(subdomains)); }
  void validate() const;
};

BoxDomain parent_domain(const PddConfig& config);
BranchingSpec branching_spec(const PddConfig& config);
ParabolicProblem1D parabolic_problem(const PddConfig& config);
ParabolicOptions parabolic_options(const PddConfig& config);
EllipticOptions elliptic_options(const PddConfig& config);

struct StageTimings {
  double mc_seconds = 0.0;
  double interp_seconds = 0.0;
  double solve_seconds = 0.0;
  double total_seconds = 0.0;
  std::vector<double> per_node_seconds;
  std::vector<double> per_subdomain_seconds;
  /// Max-over-processors makespans of the two stages.
  double mc_model_seconds = 0.0;
  double solve_model_seconds = 0.0;

  double model_total_seconds() const { return mc_model_seconds + interp_seconds + solve_model_seconds; }
};

struct SpeedupReport {
  std::string baseline_label;
  std::string method_label;
  double speedup = 0.0;
};

/// S = baseline.total_seconds / method.total_seconds.
SpeedupReport measure_speedup(const StageTimings& baseline, const StageTimings& method,
                              std::string baseline_label = "baseline", std::string method_label = "method");
/// Same ratio on the idealized model totals.
SpeedupReport measure_model_speedup(const StageTimings& baseline, const StageTimings& method,
                                    std::string baseline_label = "baseline", std::string method_label = "method");

struct GlobalSolution {
  /// Parabolic: rows are stored times, columns x. Elliptic: rows y, columns x.
  GridSolution grid;
  InterfaceGrid interface;
  std::vector<Polynomial> interpolants;
  std::vector<long long> restarts_per_cut;
  /// Largest |Gamma_k(0) - psi(cut)| handed to a subdomain solve.
  double compatibility_mismatch = 0.0;

  long long restarts() const;
};

struct PddResult {
  GlobalSolution solution;
  StageTimings timings;
};

/// Least-squares polynomial through the nodes of each cut, in the level
/// variable. Degree levels - 1 interpolates.
std::vector<Polynomial> interpolate_interface(const InterfaceGrid& grid, int degree);

/// Monte Carlo estimates of every interface node. Task k covers cut k for
/// parabolic problems (all time levels from one family of trees) and one
/// (cut, level) node for elliptic problems.
InterfaceGrid estimate_interface(const PddConfig& config, std::vector<double>& task_seconds,
                                 std::vector<long long>& restarts_per_cut);

/// Partition, interface Monte Carlo, interpolation, independent subdomain
/// solves and stitching. p = 1 is the monolithic solver.
PddResult run_pdd(const PddConfig& config);

struct ErrorTable {
  double region_lo = 0.0;
  double region_hi = 0.0;
  /// Max |u - exact| over the window (final time row for parabolic problems).
  double max_abs_error = 0.0;
  /// Max |estimate - exact| over interface nodes.
  double interface_max_abs_error = 0.0;
};

/// Errors against the closed form, when the problem has one.
std::optional<ErrorTable> error_table(const PddConfig& config, const GlobalSolution& solution);

/// Result of `check`: the marked-branching assumption report for branching
/// problems, the sign checks for linear ones.
struct CheckResult {
  std::string problem;
  std::optional<AssumptionReport> assumptions;
  bool ok = true;
  std::string message;
};

CheckResult check_config(const PddConfig& config);

}  // namespace pdd
