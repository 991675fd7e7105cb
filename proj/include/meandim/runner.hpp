#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "meandim/estimate.hpp"

namespace meandim {

// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks must
// write results into preallocated slots keyed by i; merge order is then
// index order, so the output is identical for any worker count.
template <typename Task>
void run_parallel(std::size_t count, std::size_t workers, Task&& task) {
  if (count == 0) return;
  if (workers == 0) workers = 1;
  if (workers > count) workers = count;
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error) return;
      }
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline DimensionReport run_metric_estimate(const CellSource& src, const ScaleGrid& grid,
                                           const EstimatorOptions& opt, std::size_t workers) {
  grid.validate(src.resolution_floor());
  const std::size_t nw = grid.windows();
  std::vector<std::vector<CountCell>> parts(nw);
  run_parallel(nw, workers, [&](std::size_t i) {
    parts[i] = detail::count_cells_for_window(src, grid, opt, grid.n_min + static_cast<int>(i));
  });
  std::vector<CountCell> cells;
  for (auto& p : parts) {
    for (auto& c : p) cells.push_back(std::move(c));
  }
  return detail::assemble_dimension_report(std::move(cells), grid, opt, src.describe());
}

}  // namespace meandim
