#pragma once

#include <cstddef>
#include <exception>

namespace wpca::detail {

// Runs fn(0..n-1) across OpenMP threads. The first exception thrown by any
// task is rethrown on the calling thread once all tasks have finished.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  std::exception_ptr err;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(wpca_parallel_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace wpca::detail
