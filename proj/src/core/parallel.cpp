#include "himol/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace himol {
namespace {
std::atomic<unsigned> g_jobs{0};
// Set while running a parallel body; nested loops then run inline so the
// worker cap holds globally.
thread_local bool t_in_parallel = false;

struct InParallel {
  bool saved = t_in_parallel;
  InParallel() { t_in_parallel = true; }
  ~InParallel() { t_in_parallel = saved; }
};
}

void set_max_jobs(unsigned jobs) { g_jobs = jobs; }

unsigned max_jobs() {
  unsigned j = g_jobs.load();
  if (j == 0) j = std::max(1u, std::thread::hardware_concurrency());
  return j;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = t_in_parallel ? 1 : std::min<std::size_t>(max_jobs(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    const InParallel guard;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace himol
