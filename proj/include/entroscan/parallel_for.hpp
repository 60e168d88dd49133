#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace entroscan {

/// OpenMP fan-out over [0, n). The first exception thrown by `fn` (lowest
/// index wins, so the reported error does not depend on scheduling) is
/// rethrown after the loop.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex guard;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(i) < error_index) {
        error_index = static_cast<std::size_t>(i);
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace entroscan
