#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace cds {

// Worker count from WORKER_THREADS, defaulting to hardware parallelism.
inline int worker_threads() {
  if (const char* env = std::getenv("WORKER_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

// Runs fn(i) for i in [0, n); results must go to per-index slots so that any
// later reduction happens in index order.
template <class Fn>
void parallel_for(int n, Fn fn) {
  const int workers = std::min(worker_threads(), std::max(n, 1));
  if (workers <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Max over per-index values, reduced in index order; a NaN anywhere propagates.
template <class Fn>
double parallel_max(int n, Fn fn) {
  std::vector<double> vals(n, 0.0);
  parallel_for(n, [&](int i) { vals[i] = fn(i); });
  double m = 0.0;
  for (double v : vals) {
    if (std::isnan(v)) return v;
    m = std::max(m, v);
  }
  return m;
}

}  // namespace cds
