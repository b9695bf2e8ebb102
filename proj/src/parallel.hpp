#pragma once

#include <cstdint>
#include <exception>

namespace shatterlab::detail {

/// Runs body(i) for i in [0, count) over OpenMP threads. The first exception
/// thrown by any iteration is rethrown after the loop.
template <class Body>
void parallel_for(std::int64_t count, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    bool skip = false;
#pragma omp critical(shatterlab_failure)
    skip = static_cast<bool>(failure);
    if (skip) continue;
    try {
      body(i);
    } catch (...) {
#pragma omp critical(shatterlab_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace shatterlab::detail
