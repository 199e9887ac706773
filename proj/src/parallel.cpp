#include "thermohom/parallel.hpp"

#include "thermohom/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace thermohom {

namespace {

std::atomic<int> g_workers{1};
constexpr std::size_t kBlock = 2048;
thread_local bool t_inside_worker = false;

}  // namespace

void set_worker_count(int workers) {
  if (workers < 1) throw Error("worker count must be >= 1");
  g_workers.store(workers);
}

int worker_count() { return g_workers.load(); }

void parallel_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = static_cast<std::size_t>(worker_count());
  if (workers <= 1 || n < 2 * workers || t_inside_worker) {
    if (n > 0) fn(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      t_inside_worker = true;
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  parallel_ranges(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

double deterministic_dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  double total = 0.0;
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t begin = blk * kBlock;
    const std::size_t end = std::min(n, begin + kBlock);
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

double deterministic_sum(std::span<const double> a) {
  double total = 0.0;
  std::size_t i = 0;
  while (i < a.size()) {
    const std::size_t end = std::min(a.size(), i + kBlock);
    double s = 0.0;
    for (; i < end; ++i) s += a[i];
    total += s;
  }
  return total;
}

}  // namespace thermohom
