#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>
#include <thread>
#include <atomic>
#include <functional>

namespace trapnls {

using Cx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// Thrown when an evolution produces a non-finite value.  Carries enough
// context to tell the user where the run died.
class NumericalAbort : public std::runtime_error {
public:
  NumericalAbort(const std::string& where, double t)
      : std::runtime_error(where + ": non-finite value at t=" + std::to_string(t)),
        time(t) {}
  double time;
};

class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::atomic<int>& thread_count_ref() {
  static std::atomic<int> n{1};
  return n;
}

inline void set_threads(int n) {
  thread_count_ref() = n < 1 ? 1 : n;
}

inline int threads() { return thread_count_ref().load(); }

// Static partition of [0, n) across the configured thread count.  Work items
// must be independent; identical results regardless of thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int nt = std::min<std::size_t>(threads(), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// FNV-1a, used to derive deterministic output file names from configs.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace trapnls
