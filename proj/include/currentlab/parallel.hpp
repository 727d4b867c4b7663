#pragma once

#include <exception>
#include <type_traits>
#include <vector>

namespace currentlab {

enum class Exec { Serial, Parallel };

/// out[i] = f(i) for i < n. The parallel path runs the tasks under OpenMP;
/// results land in their own slots, so both paths return identical vectors.
/// If tasks throw, the exception of the lowest index is rethrown.
template <class F>
auto map_tasks(int n, F&& f, Exec exec) -> std::vector<std::invoke_result_t<F&, int>> {
  using R = std::invoke_result_t<F&, int>;
  std::vector<R> out(static_cast<std::size_t>(n));
  if (exec == Exec::Serial) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace currentlab
