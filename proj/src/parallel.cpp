#include "ozimmu/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace ozimmu {
namespace {

std::atomic<unsigned> g_threads{0};

unsigned default_threads() {
  if (const char* env = std::getenv("OZIMM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

void set_num_threads(unsigned n) { g_threads.store(n); }

unsigned num_threads() {
  const unsigned n = g_threads.load(std::memory_order_relaxed);
  return n != 0 ? n : default_threads();
}

}  // namespace ozimmu
