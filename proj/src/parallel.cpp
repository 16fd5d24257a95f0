#include "confcount/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace confcount::par {

unsigned thread_count() {
  static const unsigned n = [] {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("CONFIG_COUNT_THREADS")) {
      long want = std::strtol(env, nullptr, 10);
      if (want >= 1) hw = static_cast<unsigned>(want);
    }
    return hw;
  }();
  return n;
}

void for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& body) {
  unsigned workers = thread_count();
  if (workers <= 1 || n_blocks <= 1) {
    for (std::size_t i = 0; i < n_blocks; ++i) body(i);
    return;
  }
  if (workers > n_blocks) workers = static_cast<unsigned>(n_blocks);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n_blocks) return;
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

double sum_blocks(std::size_t n_blocks, const std::function<double(std::size_t)>& body) {
  std::vector<double> partial(n_blocks, 0.0);
  for_blocks(n_blocks, [&](std::size_t i) { partial[i] = body(i); });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace confcount::par
