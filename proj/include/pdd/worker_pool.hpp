#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pdd {

/// Runs `count` independent tasks on `workers` threads. Task i is assigned to
/// worker i % workers and each worker runs its tasks in increasing order, so
/// the assignment is a fixed function of (count, workers). Returns the wall
/// time of every task in seconds. The first exception thrown by any task is
/// rethrown after all workers have joined.
std::vector<double> run_round_robin(std::size_t count, std::size_t workers,
                                    const std::function<void(std::size_t)>& task);

/// Idealized parallel makespan: tasks placed round-robin on `workers`
/// virtual processors, each processor running its tasks back to back.
double round_robin_makespan(const std::vector<double>& task_seconds, std::size_t workers);

}  // namespace pdd
