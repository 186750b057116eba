#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pinning {

/// Number of workers used when a caller passes 0.
inline unsigned default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1u : hc;
}

/**
 * Evaluates fn(i) for i in [0, count) on a bounded pool and returns the
 * results in index order. The output never depends on `threads` or on
 * completion order, only on fn.
 */
template <class F>
auto parallel_map(std::size_t count, unsigned threads, F&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Mean and standard error of the mean, summed in index order.
struct SampleStats {
  double mean = 0.0;
  double std_err = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& x) {
  SampleStats st;
  if (x.empty()) return st;
  double sum = 0.0;
  for (double v : x) sum += v;
  st.mean = sum / static_cast<double>(x.size());
  if (x.size() < 2) return st;
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
    st.mean = x.front();
    return st;
  }
  double ss = 0.0;
  for (double v : x) ss += (v - st.mean) * (v - st.mean);
  st.std_err = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return st;
}

}  // namespace pinning
