#include "pdd/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "pdd/error.hpp"
#include "pdd/worker_pool.hpp"

namespace pdd {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string node_label(std::size_t cut, std::size_t level) {
  return "interface node (cut " + std::to_string(cut) + ", level " + std::to_string(level) + ")";
}

// Rethrows with the failing task identified.
template <class Fn>
void with_context(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.detail());
  }
}

// Places the subdomain grids side by side along x; the first column of every
// subdomain after the first is the cut shared with its left neighbour.
GridSolution stitch(const std::vector<GridSolution>& parts) {
  GridSolution out;
  out.row_axis = parts.front().row_axis;
  Eigen::Index columns = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) columns += parts[k].values.cols() - (k > 0 ? 1 : 0);
  out.values.resize(parts.front().values.rows(), columns);
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& part = parts[k];
    const Eigen::Index skip = k > 0 ? 1 : 0;
    const Eigen::Index width = part.values.cols() - skip;
    out.values.middleCols(at, width) = part.values.rightCols(width);
    out.col_axis.insert(out.col_axis.end(), part.col_axis.begin() + skip, part.col_axis.end());
    out.max_residual = std::max(out.max_residual, part.max_residual);
    out.iterations = std::max(out.iterations, part.iterations);
    at += width;
  }
  return out;
}

}  // namespace

LinearBvpProblem make_manufactured_problem() {
  return LinearBvpProblem{make_manufactured_bvp(), make_manufactured_elliptic(), manufactured_solution};
}

std::string PddConfig::problem_name() const {
  return std::visit(Overloaded{[](const LinearBvpProblem&) { return std::string("elliptic"); },
                               [](const KppSpec&) { return std::string("kpp"); },
                               [](const CvaSpec&) { return std::string("cva"); }},
                    problem);
}

void PddConfig::validate() const {
  require(subdomains >= 1, ErrorKind::Configuration, "subdomain count must be >= 1");
  require(samples >= 2, ErrorKind::Configuration, "samples per node must be >= 2");
  require(levels >= 2, ErrorKind::Configuration, "interface level count must be >= 2");
  require(mc_dt > 0.0, ErrorKind::Configuration, "Monte Carlo step must be positive");
  require(solver_dx > 0.0 && solver_dy > 0.0 && solver_dt > 0.0, ErrorKind::Configuration,
          "solver mesh sizes must be positive");
  require(workers >= 1, ErrorKind::Configuration, "worker count must be >= 1");
  require(processors() >= 1, ErrorKind::Configuration, "model processor count must be >= 1");
  require(prune_limit >= 1, ErrorKind::Configuration, "prune limit must be >= 1");
  require(!target_std_error || *target_std_error > 0.0, ErrorKind::Configuration,
          "target accuracy must be positive");
  const int d = interpolation_degree();
  require(d >= 0 && d < levels, ErrorKind::Configuration, "interpolation degree must be below the level count");
  const BoxDomain parent = parent_domain(*this);
  require(axis >= 0 && axis < parent.dim(), ErrorKind::Configuration, "partition axis out of range");
  if (elliptic()) {
    require(parent.dim() == 2, ErrorKind::Unsupported, "the linear pipeline needs a 2D rectangle");
    std::get<LinearBvpProblem>(problem).stochastic.validate();
  } else {
    const double horizon = std::holds_alternative<KppSpec>(problem) ? std::get<KppSpec>(problem).horizon
                                                                    : std::get<CvaSpec>(problem).horizon;
    require(horizon > 0.0, ErrorKind::Configuration, "horizon must be positive");
    branching_spec(*this).validate();
  }
}

BoxDomain parent_domain(const PddConfig& config) {
  return std::visit(Overloaded{[](const LinearBvpProblem& p) { return p.stochastic.domain; },
                               [](const KppSpec& k) { return BoxDomain::interval(k.lo, k.hi); },
                               [](const CvaSpec& c) { return BoxDomain::interval(c.lo, c.hi); }},
                    config.problem);
}

BranchingSpec branching_spec(const PddConfig& config) {
  if (const auto* kpp = std::get_if<KppSpec>(&config.problem)) {
    return make_kpp_branching(*kpp, config.prune_limit, config.mc_dt);
  }
  if (const auto* cva = std::get_if<CvaSpec>(&config.problem)) {
    return make_cva_branching(*cva, config.prune_limit, config.mc_dt);
  }
  fail(ErrorKind::Unsupported, "linear problems have no branching representation");
}

ParabolicProblem1D parabolic_problem(const PddConfig& config) {
  if (const auto* kpp = std::get_if<KppSpec>(&config.problem)) return make_kpp_parabolic(*kpp);
  if (const auto* cva = std::get_if<CvaSpec>(&config.problem)) return make_cva_parabolic(*cva);
  fail(ErrorKind::Unsupported, "linear problems are solved as elliptic problems");
}

ParabolicOptions parabolic_options(const PddConfig& config) {
  ParabolicOptions options;
  options.dx = config.solver_dx;
  options.dt = config.solver_dt;
  options.tol = config.picard_tol;
  if (!config.elliptic()) {
    const auto problem = parabolic_problem(config);
    options.output_times = uniform_levels(0.0, problem.horizon, static_cast<std::size_t>(config.levels));
  }
  return options;
}

EllipticOptions elliptic_options(const PddConfig& config) {
  EllipticOptions options;
  options.dx = config.solver_dx;
  options.dy = config.solver_dy;
  options.tol = config.elliptic_tol;
  return options;
}

SpeedupReport measure_speedup(const StageTimings& baseline, const StageTimings& method, std::string baseline_label,
                              std::string method_label) {
  require(method.total_seconds > 0.0 && std::isfinite(method.total_seconds), ErrorKind::InvalidMeasurement,
          "method time must be positive");
  return {std::move(baseline_label), std::move(method_label), baseline.total_seconds / method.total_seconds};
}

SpeedupReport measure_model_speedup(const StageTimings& baseline, const StageTimings& method,
                                    std::string baseline_label, std::string method_label) {
  const double t = method.model_total_seconds();
  require(t > 0.0 && std::isfinite(t), ErrorKind::InvalidMeasurement, "method time must be positive");
  return {std::move(baseline_label), std::move(method_label), baseline.model_total_seconds() / t};
}

long long GlobalSolution::restarts() const {
  return std::accumulate(restarts_per_cut.begin(), restarts_per_cut.end(), 0LL);
}

std::vector<Polynomial> interpolate_interface(const InterfaceGrid& grid, int degree) {
  require(grid.complete(), ErrorKind::IncompleteGrid, "interface grid has nodes without values");
  require(degree >= 0 && static_cast<std::size_t>(degree) < grid.level_count(), ErrorKind::InvalidArgument,
          "interpolation degree must be below the level count");
  std::vector<Polynomial> out;
  const auto& levels = grid.levels();
  for (std::size_t k = 0; k < grid.cut_count(); ++k) {
    std::vector<double> y(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) {
      y[j] = grid.values()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
    out.push_back(fit_least_squares<double>(levels, y, degree));
  }
  return out;
}

InterfaceGrid estimate_interface(const PddConfig& config, std::vector<double>& task_seconds,
                                 std::vector<long long>& restarts_per_cut) {
  const Partition partition = partition_box(parent_domain(config), config.axis, config.subdomains);
  const auto levels = static_cast<std::size_t>(config.levels);
  const std::size_t cuts = partition.cut_points.size();
  restarts_per_cut.assign(cuts, 0);

  if (!config.elliptic()) {
    const BranchingSpec spec = branching_spec(config);
    InterfaceGrid grid = build_interface_grid(partition, uniform_levels(0.0, spec.horizon, levels));
    const std::vector<double> checkpoints(grid.levels().begin() + 1, grid.levels().end());
    BranchingOptions options;
    options.samples = config.samples;
    options.target_std_error = config.target_std_error.value_or(0.0);
    options.max_samples = std::max(config.max_samples, config.samples);
    options.batch = config.samples;

    std::vector<NodeEstimates> results(cuts);
    task_seconds = run_round_robin(cuts, config.workers, [&](std::size_t k) {
      with_context("interface cut " + std::to_string(k), [&] {
        const RngStream base(config.seed, StreamKey{k, 0, 0});
        results[k] = estimate_branching(grid.node_point(k, 0), spec, checkpoints, options, base);
      });
    });
    for (std::size_t k = 0; k < cuts; ++k) {
      const Point x = grid.node_point(k, 0);
      grid.set_value(k, 0, spec.terminal.fn(x), 0.0, config.samples);
      for (std::size_t j = 1; j < levels; ++j) {
        const auto& e = results[k].per_checkpoint[j - 1];
        grid.set_value(k, j, e.value, e.std_error, e.n_samples);
      }
      restarts_per_cut[k] = results[k].restarts;
    }
    return grid;
  }

  const auto& problem = std::get<LinearBvpProblem>(config.problem);
  const int other = 1 - config.axis;
  const BoxDomain& parent = partition.parent;
  InterfaceGrid grid =
      build_transverse_grid(partition, uniform_levels(parent.lo(other), parent.hi(other), levels));
  EstimatorOptions options;
  options.samples = config.samples;
  options.dt = config.mc_dt;
  options.target_std_error = config.target_std_error.value_or(0.0);
  options.max_samples = std::max(config.max_samples, config.samples);
  options.batch = config.samples;

  const std::size_t nodes = grid.node_count();
  std::vector<PointEstimate> results(nodes);
  task_seconds = run_round_robin(nodes, config.workers, [&](std::size_t node) {
    const std::size_t k = node / levels;
    const std::size_t j = node % levels;
    const Point x = grid.node_point(k, j);
    if (!parent.contains_strictly(x)) {
      results[node] = PointEstimate{problem.stochastic.dirichlet(x, 0.0), 0.0, config.samples, 0.0};
      return;
    }
    with_context(node_label(k, j), [&] {
      const RngStream base(config.seed, StreamKey{node, 0, 0});
      results[node] = estimate_point(x, 0.0, problem.stochastic, options, base);
    });
  });
  for (std::size_t node = 0; node < nodes; ++node) {
    const auto& e = results[node];
    grid.set_value(node / levels, node % levels, e.value, e.std_error, e.n_samples);
  }
  return grid;
}

PddResult run_pdd(const PddConfig& config) {
  config.validate();
  const auto start = Clock::now();
  PddResult result;
  auto& timings = result.timings;
  auto& solution = result.solution;
  const std::size_t p = static_cast<std::size_t>(config.subdomains);
  const Partition partition = partition_box(parent_domain(config), config.axis, config.subdomains);

  if (p > 1) {
    const auto mc_start = Clock::now();
    solution.interface = estimate_interface(config, timings.per_node_seconds, solution.restarts_per_cut);
    timings.mc_seconds = seconds_since(mc_start);
    timings.mc_model_seconds = round_robin_makespan(timings.per_node_seconds, config.processors());

    const auto interp_start = Clock::now();
    solution.interpolants = interpolate_interface(solution.interface, config.interpolation_degree());
    timings.interp_seconds = seconds_since(interp_start);
  }
  const auto& gamma = solution.interpolants;

  std::vector<GridSolution> parts(p);
  const auto solve_start = Clock::now();
  if (!config.elliptic()) {
    require(config.axis == 0, ErrorKind::Configuration, "1D problems are partitioned along axis 0");
    const ParabolicProblem1D whole = parabolic_problem(config);
    const ParabolicOptions whole_options = parabolic_options(config);
    std::vector<ParabolicProblem1D> problems(p, whole);
    std::vector<ParabolicOptions> options(p, whole_options);
    for (std::size_t k = 0; k < p; ++k) {
      auto& sub = problems[k];
      sub.lo = partition.subdomains[k].lo(0);
      sub.hi = partition.subdomains[k].hi(0);
      if (k > 0) {
        sub.left_bc = [poly = gamma[k - 1]](double t) { return poly(t); };
        solution.compatibility_mismatch =
            std::max(solution.compatibility_mismatch, std::abs(gamma[k - 1](0.0) - whole.initial(sub.lo)));
      }
      if (k + 1 < p) {
        sub.right_bc = [poly = gamma[k]](double t) { return poly(t); };
      }
      if (p > 1) options[k].compatibility_tol = std::numeric_limits<double>::infinity();
    }
    timings.per_subdomain_seconds = run_round_robin(p, config.workers, [&](std::size_t k) {
      with_context("subdomain " + std::to_string(k), [&] { parts[k] = solve_parabolic_1d(problems[k], options[k]); });
    });
  } else {
    const auto& linear = std::get<LinearBvpProblem>(config.problem);
    require(config.axis == 0, ErrorKind::Unsupported, "elliptic problems are partitioned along x");
    const EllipticOptions whole_options = elliptic_options(config);
    std::vector<EllipticProblem2D> problems(p, linear.deterministic);
    std::vector<EllipticOptions> options(p, whole_options);
    for (std::size_t k = 0; k < p; ++k) {
      const auto& box = partition.subdomains[k];
      problems[k].x_lo = box.lo(0);
      problems[k].x_hi = box.hi(0);
      problems[k].y_lo = box.lo(1);
      problems[k].y_hi = box.hi(1);
      if (k > 0) options[k].left = [poly = gamma[k - 1]](double y) { return poly(y); };
      if (k + 1 < p) options[k].right = [poly = gamma[k]](double y) { return poly(y); };
    }
    timings.per_subdomain_seconds = run_round_robin(p, config.workers, [&](std::size_t k) {
      with_context("subdomain " + std::to_string(k), [&] { parts[k] = solve_elliptic_2d(problems[k], options[k]); });
    });
  }
  timings.solve_seconds = seconds_since(solve_start);
  timings.solve_model_seconds = round_robin_makespan(timings.per_subdomain_seconds, config.processors());

  solution.grid = p == 1 ? std::move(parts.front()) : stitch(parts);
  timings.total_seconds = seconds_since(start);
  return result;
}

std::optional<ErrorTable> error_table(const PddConfig& config, const GlobalSolution& solution) {
  std::function<double(double, double)> exact;
  bool parabolic = false;
  if (const auto* kpp = std::get_if<KppSpec>(&config.problem)) {
    (void)kpp;
    exact = kpp_exact;
    parabolic = true;
  } else if (const auto* linear = std::get_if<LinearBvpProblem>(&config.problem)) {
    exact = linear->exact;
  }
  if (!exact) return std::nullopt;

  ErrorTable table;
  table.region_lo = config.error_lo;
  table.region_hi = config.error_hi;
  const auto& grid = solution.grid;
  const auto& xs = grid.col_axis;
  if (parabolic) {
    const Eigen::Index last = grid.values.rows() - 1;
    const double t = grid.row_axis.back();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] < config.error_lo || xs[i] > config.error_hi) continue;
      table.max_abs_error = std::max(table.max_abs_error,
                                     std::abs(grid.values(last, static_cast<Eigen::Index>(i)) - exact(xs[i], t)));
    }
  } else {
    for (std::size_t j = 0; j < grid.row_axis.size(); ++j) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double err = std::abs(grid.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) -
                                    exact(xs[i], grid.row_axis[j]));
        table.max_abs_error = std::max(table.max_abs_error, err);
      }
    }
  }

  const auto& iface = solution.interface;
  for (std::size_t k = 0; k < iface.cut_count(); ++k) {
    for (std::size_t j = 0; j < iface.level_count(); ++j) {
      const Point x = iface.node_point(k, j);
      const double truth = parabolic ? exact(x[0], iface.levels()[j]) : exact(x[0], x[1]);
      const double value = iface.values()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      table.interface_max_abs_error = std::max(table.interface_max_abs_error, std::abs(value - truth));
    }
  }
  return table;
}

CheckResult check_config(const PddConfig& config) {
  CheckResult result;
  result.problem = config.problem_name();
  try {
    config.validate();
    if (!config.elliptic()) {
      const AssumptionReport report = check_marked_assumptions(branching_spec(config));
      result.assumptions = report;
      result.ok = report.admissible();
      result.message = result.ok ? (report.warning.empty() ? "admissible" : report.warning) : report.reason;
    } else {
      result.message = "sign conditions hold";
    }
  } catch (const Error& e) {
    result.ok = false;
    result.message = e.what();
  }
  return result;
}

}  // namespace pdd
