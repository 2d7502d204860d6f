#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wunt {

inline constexpr const char* version_string = "0.1.0";

// Error taxonomy; the CLI maps each family to its own exit code.
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class schema_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Raised when the U-statistic denominator signals total overlap failure.
class overlap_error : public numeric_error {
public:
  using numeric_error::numeric_error;
};

class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Neumaier-compensated accumulator. Summation order is fixed by the
//! caller, so totals are bit-stable for a given visiting order.
class CompensatedSum {
public:
  void add(double v)
  {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_{ 0.0 };
  double comp_{ 0.0 };
};

template<typename Range>
double compensated_total(const Range& values)
{
  CompensatedSum acc;
  for (double v : values) {
    acc.add(v);
  }
  return acc.value();
}

namespace detail {

inline std::atomic<int>& thread_count_slot()
{
  static std::atomic<int> count{ 0 }; // 0 = not yet resolved
  return count;
}

inline thread_local int parallel_depth = 0;

} // namespace detail

//! Default worker count: WUNT_THREADS if set, otherwise hardware concurrency.
inline int default_thread_count()
{
  if (const char* env = std::getenv("WUNT_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) {
      return n;
    }
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void set_thread_count(int n)
{
  detail::thread_count_slot().store(n >= 1 ? n : 1);
}

inline int thread_count()
{
  int n = detail::thread_count_slot().load();
  if (n == 0) {
    n = default_thread_count();
    detail::thread_count_slot().store(n);
  }
  return n;
}

//! Runs fn(block_index, begin, end) over fixed-size blocks of [0, n).
//! The block layout is independent of the worker count, so any
//! per-block results reduced in block order are bit-stable across
//! thread counts. Nested calls run serially.
template<typename Fn>
void parallel_blocks(std::size_t n, std::size_t block_size, Fn&& fn)
{
  if (block_size == 0) {
    block_size = 1;
  }
  const std::size_t nblocks = (n + block_size - 1) / block_size;
  const int workers = detail::parallel_depth > 0 ? 1 : thread_count();
  if (workers <= 1 || nblocks <= 1) {
    ++detail::parallel_depth;
    for (std::size_t b = 0; b < nblocks; ++b) {
      fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    }
    --detail::parallel_depth;
    return;
  }

  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    ++detail::parallel_depth;
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= nblocks) {
        break;
      }
      try {
        fn(b, b * block_size, std::min(n, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
        break;
      }
    }
    --detail::parallel_depth;
  };

  std::vector<std::thread> pool;
  const int spawned = static_cast<int>(
    std::min<std::size_t>(static_cast<std::size_t>(workers), nblocks));
  pool.reserve(spawned);
  for (int t = 0; t < spawned; ++t) {
    pool.emplace_back(worker);
  }
  for (auto& th : pool) {
    th.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

} // namespace wunt
