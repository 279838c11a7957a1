#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdd/config.hpp"
#include "pdd/orchestrator.hpp"

namespace pdd {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// x,t,u rows for parabolic problems and x,y,u rows for elliptic ones.
void write_solution_csv(const std::filesystem::path& path, const PddConfig& config, const GlobalSolution& solution,
                        const OutputOptions& output);

/// cut,t,estimate,std_error,n (cut,y,... for elliptic problems).
void write_interface_csv(const std::filesystem::path& path, const PddConfig& config,
                         const GlobalSolution& solution);

nlohmann::json timings_json(const StageTimings& timings);
nlohmann::json config_json(const PddConfig& config);
nlohmann::json report_json(const PddConfig& config, const PddResult& result);
nlohmann::json check_json(const CheckResult& check);

struct BenchEntry {
  int subdomains = 1;
  StageTimings timings;
  long long restarts = 0;
};

/// Wall-clock and model speedups of every entry over the p = 1 entry.
nlohmann::json bench_json(const PddConfig& config, const std::vector<BenchEntry>& entries);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace pdd
