#pragma once

#include <stdexcept>
#include <vector>

#include "bcc/analysis.hpp"
#include "bcc/rng.hpp"

namespace bcc {

// Per-worker shift-exponential time model:
//   Pr[T_i <= t] = 1 - exp(-(mu_i / r_i) (t - a_i r_i)),  t >= a_i r_i.
struct LatencyModel {
  std::vector<double> mu;  // straggling rate per unit load, > 0
  std::vector<double> a;   // deterministic shift per unit load, >= 0

  int workers() const { return static_cast<int>(mu.size()); }

  void validate() const {
    if (mu.empty() || mu.size() != a.size()) {
      throw std::invalid_argument("latency model: mu and a must be non-empty and equally sized");
    }
    for (double v : mu) {
      if (!(v > 0.0)) throw std::invalid_argument("latency model: mu entries must be positive");
    }
    for (double v : a) {
      if (v < 0.0) throw std::invalid_argument("latency model: a entries must be >= 0");
    }
  }
};

inline LatencyModel uniform_latency(int n, double mu, double a) {
  if (n < 1) throw std::invalid_argument("uniform_latency: n must be >= 1");
  LatencyModel model;
  model.mu.assign(static_cast<std::size_t>(n), mu);
  model.a.assign(static_cast<std::size_t>(n), a);
  model.validate();
  return model;
}

// One draw of T_i for the given load: a_i * r + Exp(mu_i / r).
inline double sample_time(const LatencyModel& model, int worker, int load, RngStream& rng) {
  if (worker < 0 || worker >= model.workers()) {
    throw std::invalid_argument("sample_time: worker out of range");
  }
  if (load < 1) throw std::invalid_argument("sample_time: load must be >= 1");
  const auto i = static_cast<std::size_t>(worker);
  return model.a[i] * load + rng.exponential(model.mu[i] / load);
}

// E[max of n iid shift-exponentials] with common (mu, a, r): r (a + H_n / mu).
inline double expected_max_time(int n, double mu, double a, int r) {
  if (n < 1) throw std::invalid_argument("expected_max_time: n must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("expected_max_time: mu must be positive");
  if (a < 0.0) throw std::invalid_argument("expected_max_time: a must be >= 0");
  if (r < 1) throw std::invalid_argument("expected_max_time: r must be >= 1");
  return r * (a + harmonic(n) / mu);
}

}  // namespace bcc
