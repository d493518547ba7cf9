#include "cmm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace cmm::fft {
namespace {

// Plans are made with FFTW_ESTIMATE so the chosen algorithm, and therefore
// every rounding, is the same on every run.
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan complex_plan(int d, int N, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_tuple(d, N, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::size_t total = 1;
  std::vector<int> dims(d, N);
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(N);
  fftw_complex* buf = fftw_alloc_complex(total);
  fftw_plan plan = fftw_plan_dft(d, dims.data(), buf, buf, sign, kFlags);
  fftw_free(buf);
  cache.emplace(key, plan);
  return plan;
}

fftw_plan r2r_plan(int M, fftw_r2r_kind kind) {
  static std::map<std::pair<int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_pair(M, static_cast<int>(kind));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  double* buf = fftw_alloc_real(M);
  fftw_plan plan = fftw_plan_r2r_1d(M, buf, buf, kind, kFlags);
  fftw_free(buf);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void forward(int d, int N, cplx* data) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(complex_plan(d, N, FFTW_FORWARD), p, p);
}

void backward(int d, int N, cplx* data) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(complex_plan(d, N, FFTW_BACKWARD), p, p);
}

void dct2(int M, double* data) { fftw_execute_r2r(r2r_plan(M, FFTW_REDFT10), data, data); }

void dct3(int M, double* data) { fftw_execute_r2r(r2r_plan(M, FFTW_REDFT01), data, data); }

}  // namespace cmm::fft
