#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pdd/orchestrator.hpp"

using namespace pdd;

namespace {

PddConfig small_kpp(int p) {
  KppSpec kpp;
  kpp.lo = -40.0;
  kpp.hi = 40.0;
  PddConfig c;
  c.problem = kpp;
  c.subdomains = p;
  c.levels = 6;
  c.samples = 2000;
  c.mc_dt = 1.0;
  c.solver_dx = 0.05;
  c.solver_dt = 1e-2;
  c.seed = 77;
  return c;
}

InterfaceGrid grid_from(const std::function<double(double)>& fn, std::size_t levels) {
  const Partition part = partition_box(BoxDomain::interval(0.0, 2.0), 0, 2);
  InterfaceGrid grid = build_interface_grid(part, uniform_levels(0.0, 1.0, levels));
  for (std::size_t j = 0; j < levels; ++j) grid.set_value(0, j, fn(grid.levels()[j]), 0.0, 1);
  return grid;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("speedup is the ratio of total times") {
  StageTimings baseline, method;
  baseline.total_seconds = 60.0;
  method.total_seconds = 4.0;
  const auto s = measure_speedup(baseline, method, "monolithic", "pdd");
  CHECK(s.speedup == doctest::Approx(15.0));
  CHECK(s.baseline_label == "monolithic");
  CHECK(s.method_label == "pdd");
  CHECK(measure_speedup(baseline, baseline).speedup == 1.0);
  method.total_seconds = 0.0;
  try {
    measure_speedup(baseline, method);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidMeasurement);
  }
}

TEST_CASE("interpolation reproduces polynomials and constants") {
  auto quad = [](double t) { return 0.3 - t + 2.0 * t * t; };
  const InterfaceGrid grid = grid_from(quad, 7);
  for (int degree = 2; degree <= 6; ++degree) {
    const auto polys = interpolate_interface(grid, degree);
    REQUIRE(polys.size() == 1);
    for (double t : grid.levels()) CHECK(polys[0](t) == doctest::Approx(quad(t)).epsilon(1e-10));
  }
  const InterfaceGrid flat = grid_from([](double) { return 0.75; }, 5);
  for (int degree = 0; degree <= 4; ++degree) {
    const auto polys = interpolate_interface(flat, degree);
    CHECK(polys[0](0.37) == doctest::Approx(0.75).epsilon(1e-12));
  }
}

TEST_CASE("interpolating an incomplete grid is an error") {
  const Partition part = partition_box(BoxDomain::interval(0.0, 2.0), 0, 2);
  InterfaceGrid grid = build_interface_grid(part, uniform_levels(0.0, 1.0, 4));
  grid.set_value(0, 0, 1.0, 0.0, 1);
  try {
    interpolate_interface(grid, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IncompleteGrid);
  }
}

TEST_CASE("interpolant error under node noise scales with the noise") {
  const double sigma = 1e-3;
  const double x = 0.5;
  RngStream noise(5, {0, 0, 0});
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const InterfaceGrid grid = grid_from([&](double t) { return kpp_exact(x, t) + sigma * noise.gaussian(); }, 11);
    const auto poly = interpolate_interface(grid, 4)[0];
    for (int i = 0; i <= 200; ++i) {
      const double t = i / 200.0;
      worst = std::max(worst, std::abs(poly(t) - kpp_exact(x, t)));
    }
  }
  CHECK(worst < 4.0 * sigma);
}

TEST_CASE("config validation") {
  PddConfig c = small_kpp(2);
  c.subdomains = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_kpp(2);
  c.samples = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_kpp(2);
  c.levels = 1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_kpp(2);
  c.degree = 6;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_kpp(2);
  CHECK(c.interpolation_degree() == 4);
  c.levels = 3;
  CHECK(c.interpolation_degree() == 2);
}

TEST_CASE("p = 1 is the direct solver run") {
  const PddConfig c = small_kpp(1);
  const PddResult r = run_pdd(c);
  const GridSolution direct = solve_parabolic_1d(parabolic_problem(c), parabolic_options(c));
  CHECK(r.solution.interface.node_count() == 0);
  CHECK(r.timings.mc_seconds == 0.0);
  CHECK(r.solution.grid.col_axis == direct.col_axis);
  CHECK(r.solution.grid.row_axis == direct.row_axis);
  CHECK((r.solution.grid.values.array() == direct.values.array()).all());
}

TEST_CASE("elliptic p = 1 is the direct solver run") {
  PddConfig c;
  c.problem = make_manufactured_problem();
  c.subdomains = 1;
  c.solver_dx = 1.0 / 16;
  c.solver_dy = 1.0 / 16;
  const PddResult r = run_pdd(c);
  const GridSolution direct = solve_elliptic_2d(make_manufactured_elliptic(), elliptic_options(c));
  CHECK((r.solution.grid.values.array() == direct.values.array()).all());
}

TEST_CASE("results do not depend on the worker count") {
  PddConfig c = small_kpp(4);
  c.workers = 1;
  const PddResult one = run_pdd(c);
  c.workers = 8;
  const PddResult eight = run_pdd(c);
  CHECK((one.solution.interface.values().array() == eight.solution.interface.values().array()).all());
  CHECK((one.solution.interface.std_errors().array() == eight.solution.interface.std_errors().array()).all());
  CHECK((one.solution.grid.values.array() == eight.solution.grid.values.array()).all());
}

TEST_CASE("stitched solution carries the interface data on every cut") {
  const PddConfig c = small_kpp(4);
  const PddResult r = run_pdd(c);
  const auto& grid = r.solution.grid;
  const auto& cuts = r.solution.interface.cuts();
  REQUIRE(cuts.size() == 3);
  CHECK(grid.col_axis.front() == -40.0);
  CHECK(grid.col_axis.back() == 40.0);
  CHECK(grid.col_axis.size() == 1601);
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const auto it = std::find(grid.col_axis.begin(), grid.col_axis.end(), cuts[k]);
    REQUIRE(it != grid.col_axis.end());
    const auto col = static_cast<Eigen::Index>(it - grid.col_axis.begin());
    for (std::size_t row = 1; row < grid.row_axis.size(); ++row) {
      CHECK(grid.values(static_cast<Eigen::Index>(row), col) == r.solution.interpolants[k](grid.row_axis[row]));
    }
  }
  CHECK(std::is_sorted(grid.col_axis.begin(), grid.col_axis.end()));
  CHECK(r.timings.per_node_seconds.size() == 3);
  CHECK(r.timings.per_subdomain_seconds.size() == 4);
  CHECK(r.timings.total_seconds >= r.timings.mc_model_seconds + r.timings.solve_model_seconds);
  const auto table = error_table(c, r.solution);
  REQUIRE(table);
  CHECK(table->max_abs_error < 0.02);
}

TEST_CASE("interface accuracy does not degrade with more samples") {
  KppSpec kpp;
  kpp.lo = -1000.0;
  kpp.hi = 1000.0;
  PddConfig c;
  c.problem = kpp;
  c.subdomains = 2;
  c.levels = 21;
  c.mc_dt = 1.0;
  c.seed = 5;
  std::vector<double> medians;
  for (long long n : {500LL, 5000LL, 50000LL}) {
    c.samples = n;
    std::vector<double> dummy_seconds;
    std::vector<long long> restarts;
    const InterfaceGrid grid = estimate_interface(c, dummy_seconds, restarts);
    std::vector<double> errors;
    for (std::size_t j = 1; j < grid.level_count(); ++j) {
      errors.push_back(std::abs(grid.values()(0, static_cast<Eigen::Index>(j)) - kpp_exact(0.0, grid.levels()[j])));
    }
    REQUIRE(errors.size() == 20);
    medians.push_back(median(errors));
  }
  CHECK(medians[1] <= medians[0]);
  CHECK(medians[2] <= medians[1]);
}

TEST_CASE("elliptic pipeline with transverse interface nodes") {
  PddConfig c;
  c.problem = make_manufactured_problem();
  c.subdomains = 2;
  c.levels = 7;
  c.samples = 4000;
  c.mc_dt = 1e-3;
  c.solver_dx = 1.0 / 32;
  c.solver_dy = 1.0 / 32;
  const PddResult r = run_pdd(c);
  const auto& iface = r.solution.interface;
  CHECK(iface.level_kind() == LevelKind::Transverse);
  CHECK(iface.std_errors()(0, 0) == 0.0);
  CHECK(iface.values()(0, 0) == manufactured_solution(0.5, 0.0));
  CHECK(iface.std_errors()(0, 3) > 0.0);
  const auto table = error_table(c, r.solution);
  REQUIRE(table);
  CHECK(table->max_abs_error < 0.15);
}

TEST_CASE("violated marked assumptions name the failing node") {
  CvaSpec cva;
  cva.horizon = 0.6;
  PddConfig c;
  c.problem = cva;
  c.subdomains = 2;
  c.samples = 100;
  c.solver_dt = 1e-2;
  c.solver_dx = 0.1;
  try {
    run_pdd(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AssumptionViolated);
    CHECK(std::string(e.what()).find("interface cut 0") != std::string::npos);
  }
  const CheckResult check = check_config(c);
  CHECK_FALSE(check.ok);
  REQUIRE(check.assumptions);
  CHECK(check.assumptions->assumption_case == AssumptionCase::Violated);
}

TEST_CASE("problems without a closed form have no error table") {
  PddConfig c;
  c.problem = CvaSpec{};
  c.subdomains = 1;
  c.solver_dx = 0.1;
  c.solver_dt = 1e-2;
  const PddResult r = run_pdd(c);
  CHECK_FALSE(error_table(c, r.solution).has_value());
}
