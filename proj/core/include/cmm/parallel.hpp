#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cmm {

// Worker count: CMM_THREADS if set, otherwise the hardware concurrency.
int thread_count();
void set_thread_count(int threads);

// Calls body(begin, end) over fixed-size chunks of [0, n). Chunk boundaries do
// not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t chunk = 4096);

// Sum of term(i) over [0, n): per-chunk partial sums in index order, then the
// partials in chunk order, so the result is independent of the thread count.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term,
                         std::size_t chunk = 4096);

// Same, for several sums at once; term writes `width` values into out.
std::vector<double> deterministic_sums(std::size_t n, std::size_t width,
                                       const std::function<void(std::size_t, double*)>& term,
                                       std::size_t chunk = 4096);

}  // namespace cmm
