#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace upsilon {

inline std::size_t resolve_workers(std::size_t requested, std::size_t jobs) {
  std::size_t w = requested == 0 ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : requested;
  return std::max<std::size_t>(1, std::min(w, jobs));
}

/// Evaluates fn(i) for i in [0, n) on `workers` threads (0 = hardware
/// concurrency) and returns the results in index order. The first exception
/// by index is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, std::size_t workers, Fn fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using T = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t w = resolve_workers(workers, n);
  if (w <= 1) {
    body(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) pool.emplace_back(body, k, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace upsilon
