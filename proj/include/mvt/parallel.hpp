#pragma once

#include <cstddef>
#include <functional>

namespace mvt {

/// Execution policy for the data-parallel kernels. `serial` is the
/// reference implementation; both produce bit-identical results.
enum class Exec { serial, parallel };

/// Thread cap for `Exec::parallel`; 0 means all available cores.
void set_thread_count(int n);
int thread_count();

/// Reads MVT_THREADS (if set) and applies it. Returns the value in effect.
int configure_threads_from_env();

/// Runs body(i) for i in [0, n). Exceptions thrown by any iteration are
/// rethrown on the calling thread (the first one captured wins).
void parallel_for(std::size_t n, Exec exec, const std::function<void(std::size_t)>& body);

}  // namespace mvt
