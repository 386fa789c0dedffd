#pragma once
// Shared plumbing: error types, checked asserts, the documented PRNG, and a
// tiny deterministic parallel_for.  Everything downstream assumes these.

#include <cstdint>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace tkl {

// Violations of mathematical preconditions (bad curve, zero function where a
// unit is required, place outside the curve, ...).  CLI maps these to exit 1.
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed textual input (function expressions, place literals, JSON shapes).
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at position " + std::to_string(pos) + ")"), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

// Internal invariant failures.  These indicate a bug, not bad input, and are
// kept on in release builds: the whole point of exact arithmetic is that the
// bookkeeping identities are cheap to re-check.
#define TKL_ASSERT(cond, msg)                                                  \
  do {                                                                         \
    if (!(cond)) throw std::logic_error(std::string("internal check failed: ") + (msg)); \
  } while (0)

#define TKL_REQUIRE(cond, msg)                         \
  do {                                                 \
    if (!(cond)) throw ::tkl::domain_error((msg));     \
  } while (0)

// SplitMix64: the library's single, documented, portable PRNG.  Identical
// output on every platform for a given seed; used for all seeded test suites.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform value in [0, bound) via rejection; bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t threshold = (~bound + 1) % bound;  // 2^64 mod bound
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

// Thread cap: TKL_THREADS if set (>=1), else hardware concurrency.
inline unsigned thread_cap() {
  if (const char* env = std::getenv("TKL_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Index-sharded parallel map with a deterministic, index-ordered merge.  The
// body must be a pure function of its index; results are committed in index
// order so output never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& body) {
  unsigned threads = thread_cap();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (count + threads - 1) / threads;
  std::mutex err_mutex;
  std::exception_ptr first_error;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tkl
