#include "ambientlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ambientlab {

namespace {
int initial_jobs() {
  if (const char* env = std::getenv("AMBIENTLAB_JOBS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}
std::atomic<int> g_jobs{initial_jobs()};
}  // namespace

int jobs() { return g_jobs.load(); }
void set_jobs(int n) { g_jobs.store(n > 0 ? n : 1); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn) {
  if (n == 0) return;
  std::size_t workers = static_cast<std::size_t>(jobs());
  workers = std::min(workers, n);
  if (workers <= 1) {
    chunk_fn(0, n);
    return;
  }
  // Chunk boundaries depend only on (n, workers).
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t base = n / workers, rem = n % workers, begin = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t len = base + (w < rem ? 1 : 0);
    pool.emplace_back(chunk_fn, begin, begin + len);
    begin += len;
  }
  for (auto& t : pool) t.join();
}

void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& fn) {
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace ambientlab
