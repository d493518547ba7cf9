#include "cmm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace cmm {
namespace {

int initial_threads() {
  if (const char* env = std::getenv("CMM_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<int>& threads_setting() {
  static std::atomic<int> value{initial_threads()};
  return value;
}

}  // namespace

int thread_count() { return threads_setting().load(); }

void set_thread_count(int threads) { threads_setting().store(std::max(1, threads)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body, std::size_t chunk) {
  if (n == 0) return;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) body(c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1))
      body(c * chunk, std::min(n, (c + 1) * chunk));
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

std::vector<double> deterministic_sums(std::size_t n, std::size_t width,
                                       const std::function<void(std::size_t, double*)>& term, std::size_t chunk) {
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(chunks * width, 0.0);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> buf(width);
        double* acc = partial.data() + (begin / chunk) * width;
        for (std::size_t i = begin; i < end; ++i) {
          std::fill(buf.begin(), buf.end(), 0.0);
          term(i, buf.data());
          for (std::size_t w = 0; w < width; ++w) acc[w] += buf[w];
        }
      },
      chunk);
  std::vector<double> total(width, 0.0);
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t w = 0; w < width; ++w) total[w] += partial[c * width + w];
  return total;
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term, std::size_t chunk) {
  return deterministic_sums(
      n, 1, [&](std::size_t i, double* out) { out[0] = term(i); }, chunk)[0];
}

}  // namespace cmm
