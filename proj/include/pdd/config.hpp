#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "pdd/orchestrator.hpp"

namespace pdd {

/// Which part of the solution grid is written to solution.csv.
struct OutputOptions {
  std::optional<double> x_min;
  std::optional<double> x_max;
  /// Keep every stride-th grid column inside the window.
  int stride = 1;
};

struct RunConfig {
  PddConfig pdd;
  OutputOptions output;
};

/// INI-style configuration. Sections and keys:
///
///   [problem]    type = kpp | cva | elliptic
///                kpp: lo, hi, horizon
///                cva: intensity, sigma, horizon, payoff_scale, lo, hi,
///                     polynomial (comma-separated a0, a1, ...)
///   [partition]  axis, subdomains
///   [interface]  levels, samples, mc_dt, target_std_error, max_samples, degree
///   [solver]     dx, dy, dt, picard_tol, elliptic_tol
///   [branching]  prune_limit
///   [run]        seed, workers, model_processors
///   [output]     error_lo, error_hi, x_min, x_max, stride
///
/// Every key is optional; unknown sections or keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace pdd
