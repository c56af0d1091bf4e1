#pragma once

#include <cmath>
#include <cstddef>

namespace knnshap {

// log C(n, k); callers guarantee 0 <= k <= n.
inline double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(n, k) as a double, 0 outside the valid range. Exact for the small
// arguments used by the enumeration algorithms.
inline double choose(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double out = 1.0;
  for (long long i = 1; i <= k; ++i) {
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return out;
}

// C(a, j) / C(b, m), 0 when the numerator vanishes.
inline double choose_ratio(long long a, long long j, long long b, long long m) {
  if (j < 0 || a < 0 || j > a) return 0.0;
  if (b < 120) return choose(a, j) / choose(b, m);
  return std::exp(log_choose(static_cast<double>(a), static_cast<double>(j)) -
                  log_choose(static_cast<double>(b), static_cast<double>(m)));
}

}  // namespace knnshap
