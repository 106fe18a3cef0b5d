#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ozimmu {

/// Worker count used by the kernels. 0 restores the default, which is
/// OZIMM_THREADS when set and std::thread::hardware_concurrency() otherwise.
void set_num_threads(unsigned n);
unsigned num_threads();

/// Runs fn(lo, hi) over contiguous chunks of [begin, end). Chunk boundaries
/// never change what a single index computes, so results are independent of
/// the thread count.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, std::size_t min_chunk = 1) {
  if (end <= begin) return;
  const std::size_t total = end - begin;
  std::size_t workers = std::min<std::size_t>(num_threads(), (total + min_chunk - 1) / min_chunk);
  if (workers <= 1) {
    fn(begin, end);
    return;
  }
  const std::size_t chunk = (total + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
      const std::size_t lo = begin + w * chunk;
      const std::size_t hi = std::min(end, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, w, lo, hi] {
        try {
          fn(lo, hi);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    try {
      fn(begin, std::min(end, begin + chunk));
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ozimmu
