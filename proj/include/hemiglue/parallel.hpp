#pragma once

// Sample-sweep helpers. Every sweep has an OpenMP path and a serial reference
// path producing identical results: map outputs are stored by index and
// reductions use a fixed pairwise order, so thread count never changes a bit.

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

namespace hemi {

enum class Exec { Serial, Parallel };

/// Process-wide default used when callers do not pass an explicit policy.
Exec default_exec() noexcept;
void set_default_exec(Exec e) noexcept;
int worker_count() noexcept;

/// Pairwise (cascade) summation with a fixed tree shape.
double pairwise_sum(std::span<const double> v) noexcept;

/// out[i] = fn(i). If any call throws, the exception of the lowest index is rethrown.
template <class Fn>
auto index_map(std::size_t count, Fn&& fn, Exec exec = default_exec()) {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  const long long total = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < total; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = fn(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Deterministic sum of fn(i) over i < count.
template <class Fn>
double index_sum(std::size_t count, Fn&& fn, Exec exec = default_exec()) {
  const std::vector<double> terms = index_map(count, fn, exec);
  return pairwise_sum(terms);
}

}  // namespace hemi
