#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace efrel {

// Runs body(worker, row) for rows [0, rows), rows dealt round-robin to
// `threads` workers. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_rows(std::uint64_t rows, int threads, Body&& body) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::uint64_t>(rows, 1))));
  if (workers == 1) {
    for (std::uint64_t r = 0; r < rows; ++r) body(0, r);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t r = static_cast<std::uint64_t>(w); r < rows; r += static_cast<std::uint64_t>(workers)) {
          body(w, r);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace efrel
