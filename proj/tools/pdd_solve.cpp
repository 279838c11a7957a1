#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "pdd/config.hpp"
#include "pdd/error.hpp"
#include "pdd/orchestrator.hpp"
#include "pdd/report_io.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("config", common.config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "Master seed (overrides the config)");
  cmd->add_option("--workers", common.workers, "Worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", common.out_dir, "Output directory");
}

pdd::RunConfig load(const Common& common) {
  pdd::RunConfig run = pdd::load_config(common.config_path);
  if (common.seed) run.pdd.seed = *common.seed;
  if (common.workers) run.pdd.workers = *common.workers;
  return run;
}

std::filesystem::path prepare_out_dir(const Common& common) {
  std::filesystem::path dir(common.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_command(const Common& common) {
  const pdd::RunConfig run = load(common);
  const auto dir = prepare_out_dir(common);
  const pdd::PddResult result = pdd::run_pdd(run.pdd);
  pdd::write_solution_csv(dir / "solution.csv", run.pdd, result.solution, run.output);
  pdd::write_interface_csv(dir / "interface_nodes.csv", run.pdd, result.solution);
  const auto report = pdd::report_json(run.pdd, result);
  pdd::write_json(dir / "report.json", report);
  std::cout << "problem " << run.pdd.problem_name() << ", p = " << run.pdd.subdomains << ", total "
            << result.timings.total_seconds << " s\n";
  if (!report["error_table"].is_null()) {
    std::cout << "max abs error " << report["error_table"]["max_abs_error"].get<double>() << '\n';
  }
  std::cout << "wrote " << (dir / "solution.csv").string() << ", interface_nodes.csv, report.json\n";
  return 0;
}

int bench_command(const Common& common, const std::vector<int>& subdomains) {
  const pdd::RunConfig run = load(common);
  const auto dir = prepare_out_dir(common);
  std::vector<pdd::BenchEntry> entries;
  for (int p : subdomains) {
    pdd::PddConfig config = run.pdd;
    config.subdomains = p;
    config.model_processors.reset();
    const pdd::PddResult result = pdd::run_pdd(config);
    entries.push_back({p, result.timings, result.solution.restarts()});
    std::cout << "p = " << p << ": mc model " << result.timings.mc_model_seconds << " s, solve model "
              << result.timings.solve_model_seconds << " s, wall " << result.timings.total_seconds << " s\n";
  }
  pdd::write_json(dir / "report.json", pdd::bench_json(run.pdd, entries));
  std::cout << "wrote " << (dir / "report.json").string() << '\n';
  return 0;
}

int check_command(const Common& common) {
  const pdd::RunConfig run = load(common);
  const pdd::CheckResult check = pdd::check_config(run.pdd);
  std::cout << pdd::check_json(check).dump(2) << '\n';
  return check.ok ? 0 : pdd::exit_code(pdd::ErrorKind::AssumptionViolated);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic domain decomposition solver"};
  app.require_subcommand(1);

  Common run_opts, bench_opts, check_opts;
  auto* run = app.add_subcommand("run", "Run the full pipeline and write solution.csv, interface_nodes.csv, report.json");
  add_common(run, run_opts);

  auto* bench = app.add_subcommand("bench", "Time the pipeline for several subdomain counts");
  add_common(bench, bench_opts);
  std::vector<int> subdomains{1, 2, 4, 8};
  bench->add_option("--subdomains", subdomains, "Comma-separated subdomain counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "Run the assumption checker only");
  add_common(check, check_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return run_command(run_opts);
    if (bench->parsed()) return bench_command(bench_opts, subdomains);
    return check_command(check_opts);
  } catch (const pdd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pdd::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
