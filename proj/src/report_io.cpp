#include "pdd/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "pdd/error.hpp"

namespace pdd {
namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Configuration, "cannot write " + path.string());
  return out;
}

// JSON has no representation for non-finite numbers.
nlohmann::json number(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  require(ec == std::errc(), ErrorKind::InvalidArgument, "number formatting failed");
  return std::string(buffer, end);
}

void write_solution_csv(const std::filesystem::path& path, const PddConfig& config, const GlobalSolution& solution,
                        const OutputOptions& output) {
  auto out = open_output(path);
  const auto& grid = solution.grid;
  out << (config.elliptic() ? "x,y,u\n" : "x,t,u\n");
  const double x_min = output.x_min.value_or(-std::numeric_limits<double>::infinity());
  const double x_max = output.x_max.value_or(std::numeric_limits<double>::infinity());
  std::vector<std::size_t> columns;
  for (std::size_t i = 0; i < grid.col_axis.size(); ++i) {
    if (grid.col_axis[i] >= x_min && grid.col_axis[i] <= x_max) columns.push_back(i);
  }
  for (std::size_t r = 0; r < grid.row_axis.size(); ++r) {
    for (std::size_t n = 0; n < columns.size(); n += static_cast<std::size_t>(output.stride)) {
      const std::size_t i = columns[n];
      out << format_double(grid.col_axis[i]) << ',' << format_double(grid.row_axis[r]) << ','
          << format_double(grid.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i))) << '\n';
    }
  }
}

void write_interface_csv(const std::filesystem::path& path, const PddConfig& config,
                         const GlobalSolution& solution) {
  auto out = open_output(path);
  out << (config.elliptic() ? "cut,y,estimate,std_error,n\n" : "cut,t,estimate,std_error,n\n");
  const auto& grid = solution.interface;
  for (std::size_t k = 0; k < grid.cut_count(); ++k) {
    for (std::size_t j = 0; j < grid.level_count(); ++j) {
      const auto r = static_cast<Eigen::Index>(k);
      const auto c = static_cast<Eigen::Index>(j);
      out << k << ',' << format_double(grid.levels()[j]) << ',' << format_double(grid.values()(r, c)) << ','
          << format_double(grid.std_errors()(r, c)) << ',' << grid.samples()(r, c) << '\n';
    }
  }
}

nlohmann::json timings_json(const StageTimings& t) {
  return {{"mc_seconds", t.mc_seconds},
          {"interp_seconds", t.interp_seconds},
          {"solve_seconds", t.solve_seconds},
          {"total_seconds", t.total_seconds},
          {"per_node_seconds", t.per_node_seconds},
          {"per_subdomain_seconds", t.per_subdomain_seconds},
          {"mc_model_seconds", t.mc_model_seconds},
          {"solve_model_seconds", t.solve_model_seconds},
          {"model_total_seconds", t.model_total_seconds()}};
}

nlohmann::json config_json(const PddConfig& c) {
  nlohmann::json j{{"problem", c.problem_name()},
                   {"axis", c.axis},
                   {"subdomains", c.subdomains},
                   {"levels", c.levels},
                   {"samples", c.samples},
                   {"mc_dt", c.mc_dt},
                   {"degree", c.interpolation_degree()},
                   {"solver_dx", c.solver_dx},
                   {"solver_dt", c.solver_dt},
                   {"seed", c.seed},
                   {"workers", c.workers},
                   {"model_processors", c.processors()},
                   {"prune_limit", c.prune_limit}};
  if (c.elliptic()) j["solver_dy"] = c.solver_dy;
  j["target_std_error"] = c.target_std_error ? nlohmann::json(*c.target_std_error) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json report_json(const PddConfig& config, const PddResult& result) {
  const auto& solution = result.solution;
  nlohmann::json j;
  j["config"] = config_json(config);
  j["timings"] = timings_json(result.timings);
  j["cut_points"] = solution.interface.cuts();
  j["restarts"] = solution.restarts();
  j["restarts_per_cut"] = solution.restarts_per_cut;
  j["compatibility_mismatch"] = solution.compatibility_mismatch;
  j["solver_max_residual"] = solution.grid.max_residual;
  j["solver_iterations"] = solution.grid.iterations;
  if (const auto table = error_table(config, solution)) {
    j["error_table"] = {{"region", {table->region_lo, table->region_hi}},
                        {"max_abs_error", table->max_abs_error},
                        {"interface_max_abs_error", table->interface_max_abs_error}};
  } else {
    j["error_table"] = nullptr;
  }
  return j;
}

nlohmann::json check_json(const CheckResult& check) {
  nlohmann::json j{{"problem", check.problem}, {"ok", check.ok}, {"message", check.message}};
  if (check.assumptions) {
    const auto& a = *check.assumptions;
    j["assumptions"] = {{"case", std::string(to_string(a.assumption_case))},
                        {"l_at_1", number(a.l_at_1)},
                        {"horizon_bound", number(a.horizon_bound)},
                        {"root", number(a.root)},
                        {"radius", number(a.radius)},
                        {"psi_norm", number(a.psi_norm)},
                        {"warning", a.warning},
                        {"reason", a.reason}};
  }
  return j;
}

nlohmann::json bench_json(const PddConfig& config, const std::vector<BenchEntry>& entries) {
  nlohmann::json j;
  j["config"] = config_json(config);
  const auto baseline = std::find_if(entries.begin(), entries.end(), [](const BenchEntry& e) {
    return e.subdomains == 1;
  });
  std::vector<double> mc_model;
  for (const auto& e : entries) {
    if (e.subdomains > 1) mc_model.push_back(e.timings.mc_model_seconds);
  }
  double mc_median = 0.0;
  if (!mc_model.empty()) {
    std::sort(mc_model.begin(), mc_model.end());
    const std::size_t n = mc_model.size();
    mc_median = n % 2 ? mc_model[n / 2] : 0.5 * (mc_model[n / 2 - 1] + mc_model[n / 2]);
  }
  j["mc_model_median_seconds"] = mc_median;

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json row{{"subdomains", e.subdomains}, {"timings", timings_json(e.timings)}, {"restarts", e.restarts}};
    if (baseline != entries.end()) {
      const std::string label = "p=" + std::to_string(e.subdomains);
      row["speedup_wall"] = measure_speedup(baseline->timings, e.timings, "p=1", label).speedup;
      row["speedup_model"] = measure_model_speedup(baseline->timings, e.timings, "p=1", label).speedup;
      row["solve_model_ratio_to_ideal"] =
          e.timings.solve_model_seconds / (baseline->timings.solve_model_seconds / e.subdomains);
    }
    if (e.subdomains > 1 && mc_median > 0.0) row["mc_model_ratio_to_median"] = e.timings.mc_model_seconds / mc_median;
    rows.push_back(row);
  }
  j["runs"] = rows;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  auto out = open_output(path);
  out << value.dump(2) << '\n';
}

}  // namespace pdd
