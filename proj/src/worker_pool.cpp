#include "pdd/worker_pool.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "pdd/error.hpp"

namespace pdd {

std::vector<double> run_round_robin(std::size_t count, std::size_t workers,
                                    const std::function<void(std::size_t)>& task) {
  std::vector<double> seconds(count, 0.0);
  if (count == 0) return seconds;
  workers = std::clamp<std::size_t>(workers, 1, count);

  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run_worker = [&](std::size_t worker) {
    for (std::size_t i = worker; i < count; i += workers) {
      const auto start = std::chrono::steady_clock::now();
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  if (workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run_worker, w);
  }
  if (first_error) std::rethrow_exception(first_error);
  return seconds;
}

double round_robin_makespan(const std::vector<double>& task_seconds, std::size_t workers) {
  require(workers >= 1, ErrorKind::InvalidArgument, "makespan needs at least one worker");
  std::vector<double> load(workers, 0.0);
  for (std::size_t i = 0; i < task_seconds.size(); ++i) load[i % workers] += task_seconds[i];
  return *std::max_element(load.begin(), load.end());
}

}  // namespace pdd
