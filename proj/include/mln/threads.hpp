#pragma once

#include <cstddef>

namespace mln {

/* Worker count: MLN_THREADS env var, clamped to [1, hardware], default 1.
 * Only pointwise loops are ever parallelized; every reduction in the code
 * base is serial, so results are bit-identical for any thread count. */
int thread_count();

void parallel_for(std::size_t count, void (*body)(std::size_t, void*), void* ctx);

template <class F>
void parallel_for(std::size_t count, F&& f) {
  struct Shim {
    F* f;
    static void run(std::size_t i, void* ctx) { (*static_cast<Shim*>(ctx)->f)(i); }
  } shim{&f};
  parallel_for(count, &Shim::run, &shim);
}

}  // namespace mln
