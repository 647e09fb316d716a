#include "mvt/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

namespace mvt {

namespace {
int g_threads = 0;
}

void set_thread_count(int n) { g_threads = n < 0 ? 0 : n; }

int thread_count() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

int configure_threads_from_env() {
  if (const char* env = std::getenv("MVT_THREADS")) {
    try {
      set_thread_count(std::stoi(env));
    } catch (const std::exception&) {
      set_thread_count(0);
    }
  }
  return thread_count();
}

void parallel_for(std::size_t n, Exec exec, const std::function<void(std::size_t)>& body) {
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace mvt
