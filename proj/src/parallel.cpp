#include "spilab/parallel.hpp"

#include <cstdlib>
#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spilab {

int thread_budget() {
#ifdef _OPENMP
  int budget = omp_get_max_threads();
  if (const char* env = std::getenv("SPI_LAB_THREADS")) {
    try {
      int requested = std::stoi(env);
      if (requested < 1) requested = 1;
      if (requested < budget) budget = requested;
    } catch (const std::exception&) {
      // Unparseable value: keep the OpenMP default.
    }
  }
  return budget;
#else
  return 1;
#endif
}

void for_each_index(Exec mode, std::size_t count, const std::function<void(std::size_t)>& body) {
  if (mode == Exec::parallel) {
#ifdef _OPENMP
    const int threads = thread_budget();
    std::exception_ptr first_error = nullptr;
    long long first_error_index = -1;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(spilab_for_each_index_error)
        {
          if (first_error_index < 0 || i < first_error_index) {
            first_error_index = i;
            first_error = std::current_exception();
          }
        }
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
#endif
  }
  for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace spilab
