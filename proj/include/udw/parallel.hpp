#ifndef UDW_PARALLEL_HPP
#define UDW_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace udw {

/// Worker count from UDW_THREADS, else the hardware parallelism.
inline unsigned worker_count() {
  if (const char* env = std::getenv("UDW_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool inside_worker = false;
}

/// Runs body(i) for i in [0, n). Nested calls from inside a worker run
/// serially. If several indices throw, the lowest index's exception wins so
/// the outcome does not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = worker_count()) {
  if (n == 0) return;
  if (threads <= 1 || n == 1 || detail::inside_worker) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    detail::inside_worker = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    detail::inside_worker = false;
  };
  {
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(threads, n);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace udw

#endif  // UDW_PARALLEL_HPP
