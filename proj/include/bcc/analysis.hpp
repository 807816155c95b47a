#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcc {

// H_t = sum_{k=1..t} 1/k, accumulated smallest terms first.
inline double harmonic(long t) {
  if (t < 1) throw std::invalid_argument("harmonic: t must be >= 1");
  double sum = 0.0;
  for (long k = t; k >= 1; --k) sum += 1.0 / static_cast<double>(k);
  return sum;
}

namespace detail {
inline void check_load_range(int m, int r) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (r < 1 || r > m) throw std::invalid_argument("r must be in [1, m]");
}
}  // namespace detail

inline int batch_count(int m, int r) {
  detail::check_load_range(m, r);
  return (m + r - 1) / r;
}

// Recovery threshold of the batched coupon's collector scheme:
// ceil(m/r) * H_{ceil(m/r)}.
inline double k_bcc(int m, int r) {
  const int batches = batch_count(m, r);
  return static_cast<double>(batches) * harmonic(batches);
}

inline int k_cr(int m, int r) {
  detail::check_load_range(m, r);
  return m - r + 1;
}

inline double k_lower(int m, int r) {
  detail::check_load_range(m, r);
  return static_cast<double>(m) / static_cast<double>(r);
}

inline double k_random_approx(int m, int r) {
  detail::check_load_range(m, r);
  return static_cast<double>(m) / static_cast<double>(r) * std::log(static_cast<double>(m));
}

inline double l_random_approx(int m) {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  return static_cast<double>(m) * std::log(static_cast<double>(m));
}

// Coupon-collector tail bound: Pr(M >= (1+eps) m log m) <= m^-eps.
inline double tail_bound(int m, double eps) {
  if (m < 2) throw std::invalid_argument("tail_bound: m must be >= 2");
  if (eps < 0.0) throw std::invalid_argument("tail_bound: eps must be >= 0");
  return std::pow(static_cast<double>(m), -eps);
}

// c = 2 + log(a + H_n/mu) / log(m), with a the worst shift and mu the worst
// straggling rate in the cluster. Natural logarithms throughout.
inline double c_constant(double a, double mu, int n, int m) {
  if (m < 2) throw std::invalid_argument("c_constant: m must be >= 2");
  if (!(mu > 0.0)) throw std::invalid_argument("c_constant: mu must be positive");
  if (a < 0.0) throw std::invalid_argument("c_constant: a must be >= 0");
  return 2.0 + std::log(a + harmonic(n) / mu) / std::log(static_cast<double>(m));
}

struct TradeoffPoint {
  int r = 0;
  double k_lower = 0.0;
  double k_bcc = 0.0;
  int k_cr = 0;
  double k_random = 0.0;  // approximation (m/r) ln m
  double l_bcc = 0.0;     // equals k_bcc: one gradient-sized message per counted worker
  double l_random = 0.0;  // approximation m ln m
};

inline std::vector<TradeoffPoint> tradeoff_table(int m, const std::vector<int>& r_values) {
  std::vector<TradeoffPoint> table;
  table.reserve(r_values.size());
  for (int r : r_values) {
    detail::check_load_range(m, r);
    TradeoffPoint pt;
    pt.r = r;
    pt.k_lower = k_lower(m, r);
    pt.k_bcc = k_bcc(m, r);
    pt.k_cr = k_cr(m, r);
    pt.k_random = k_random_approx(m, r);
    pt.l_bcc = pt.k_bcc;
    pt.l_random = l_random_approx(m);
    table.push_back(pt);
  }
  return table;
}

}  // namespace bcc
