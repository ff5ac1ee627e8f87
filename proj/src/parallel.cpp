#include "tipdiv/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace tipdiv {

namespace {
std::atomic<int> override_workers{0};
}

int worker_count() {
  if (int w = override_workers.load(); w > 0) return w;
  if (const char* env = std::getenv("TIPDIV_WORKERS"); env != nullptr) {
    try {
      int w = std::stoi(env);
      if (w > 0) return w;
    } catch (...) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void set_worker_count(int workers) { override_workers.store(std::max(0, workers)); }

}  // namespace tipdiv
