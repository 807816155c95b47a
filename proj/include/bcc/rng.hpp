#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace bcc {

// SplitMix64 finalizer; used both for seeding and for deriving substreams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t key) {
  return splitmix64(seed ^ splitmix64(key));
}

// Seeded random stream with deterministic substream derivation.
//
// derive(key) depends only on the stream's root seed, never on how many
// draws were made, so substreams keyed by (trial, worker, ...) are stable
// no matter the order in which they are created or consumed. Sampling
// routines are written out explicitly (no std::*_distribution) so the
// byte stream is identical across standard library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : root_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t root_seed() const { return root_; }

  RngStream derive(std::uint64_t key) const { return RngStream(mix_key(root_, key)); }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    const std::uint64_t threshold = (0 - span) % span;  // 2^64 mod span
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return lo + static_cast<int>(r % span);
    }
  }

  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
    return -std::log1p(-uniform01()) / rate;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Box-Muller; u1 kept away from zero so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // k distinct values from {0, ..., population-1}, sorted ascending.
  std::vector<int> sample_without_replacement(int population, int k) {
    if (k < 0 || k > population) {
      throw std::invalid_argument("sample_without_replacement: k out of range");
    }
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    if (k <= 64 || k <= population / 8) {
      // Floyd's algorithm; linear membership scan is fine at these sizes.
      for (int j = population - k; j < population; ++j) {
        const int t = uniform_int(0, j);
        bool seen = false;
        for (int v : out) {
          if (v == t) {
            seen = true;
            break;
          }
        }
        out.push_back(seen ? j : t);
      }
    } else {
      std::vector<int> idx(static_cast<std::size_t>(population));
      for (int i = 0; i < population; ++i) idx[static_cast<std::size_t>(i)] = i;
      for (int i = 0; i < k; ++i) {
        const int j = uniform_int(i, population - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      }
      out.assign(idx.begin(), idx.begin() + k);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::uint64_t root_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bcc
