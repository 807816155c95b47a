#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcc/csv.hpp"
#include "bcc/data.hpp"
#include "bcc/linalg.hpp"
#include "bcc/rng.hpp"

namespace bcc {

enum class SchemeId { kUncoded, kRandom, kCyclicRepetition, kBcc, kGeneralizedBcc };

inline std::string scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::kUncoded: return "uncoded";
    case SchemeId::kRandom: return "random";
    case SchemeId::kCyclicRepetition: return "cr";
    case SchemeId::kBcc: return "bcc";
    case SchemeId::kGeneralizedBcc: return "gbcc";
  }
  throw std::logic_error("unknown scheme id");
}

inline SchemeId scheme_from_name(const std::string& name) {
  if (name == "uncoded") return SchemeId::kUncoded;
  if (name == "random") return SchemeId::kRandom;
  if (name == "cr") return SchemeId::kCyclicRepetition;
  if (name == "bcc") return SchemeId::kBcc;
  if (name == "gbcc") return SchemeId::kGeneralizedBcc;
  throw std::invalid_argument("unknown scheme: " + name +
                              " (expected uncoded|random|cr|bcc|gbcc)");
}

// Bipartite data-assignment graph: assignments[i] lists the placement units
// worker i processes, sorted ascending.
struct Placement {
  int n = 0;
  int m = 0;
  std::vector<std::vector<int>> assignments;
  std::vector<int> load_per_worker;
  std::vector<int> batch_choice;  // BCC only: the batch each worker picked

  int max_load() const {
    int best = 0;
    for (int v : load_per_worker) best = std::max(best, v);
    return best;
  }

  bool covers_all_units() const {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    int count = 0;
    for (const auto& g : assignments) {
      for (int u : g) {
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          ++count;
        }
      }
    }
    return count == m;
  }
};

// One worker-to-master message. Combined schemes (uncoded, CR, BCC) carry a
// single gradient-sized payload and tag it with a batch/row id; per-unit
// schemes (random, generalized BCC) enumerate their units. Payloads are left
// empty when the simulation only tracks counts and times.
struct Message {
  int worker_id = -1;
  int tag = -1;
  std::vector<int> units;
  std::vector<std::vector<double>> payloads;
  int size_units = 1;
};

struct DecodeState {
  SchemeId scheme = SchemeId::kUncoded;
  int num_workers = 0;
  int num_units = 0;
  int num_batches = 0;  // BCC
  int threshold = 0;    // CR: m - r + 1
  std::vector<Message> received;
  std::vector<std::uint8_t> covered;  // batches (BCC), units (random/gbcc), workers (uncoded/CR)
  int covered_count = 0;
  int kept_payloads = 0;
  bool complete = false;
  std::vector<std::vector<double>> kept;  // first payload per covered target
};

namespace detail {

inline void check_payload_dims(const std::vector<std::vector<double>>& grads) {
  for (std::size_t i = 1; i < grads.size(); ++i) {
    if (grads[i].size() != grads[0].size()) {
      throw std::invalid_argument("encode: gradient dimension mismatch");
    }
  }
}

inline void add_into(std::vector<double>& acc, const std::vector<double>& v) {
  if (acc.empty()) {
    acc = v;
    return;
  }
  if (acc.size() != v.size()) throw std::invalid_argument("gradient dimension mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Placement rules

// Disjoint contiguous shards, sizes differing by at most one.
inline Placement uncoded_place(int n, int m) {
  if (n < 1) throw std::invalid_argument("uncoded_place: n must be >= 1");
  if (m < 1) throw std::invalid_argument("uncoded_place: m must be >= 1");
  if (n > m) throw std::invalid_argument("uncoded_place: n must be <= m");
  Placement pl;
  pl.n = n;
  pl.m = m;
  pl.assignments = even_split(m, n);
  pl.load_per_worker.reserve(static_cast<std::size_t>(n));
  for (const auto& g : pl.assignments) pl.load_per_worker.push_back(static_cast<int>(g.size()));
  return pl;
}

// Each worker independently samples an r-subset of the units uniformly at
// random; partial gradients are later sent individually.
inline Placement random_place(int n, int m, int r, const RngStream& rng) {
  if (n < 1) throw std::invalid_argument("random_place: n must be >= 1");
  if (m < 1) throw std::invalid_argument("random_place: m must be >= 1");
  if (r < 1 || r > m) throw std::invalid_argument("random_place: r must be in [1, m]");
  Placement pl;
  pl.n = n;
  pl.m = m;
  pl.assignments.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RngStream worker_rng = rng.derive(static_cast<std::uint64_t>(i));
    pl.assignments.push_back(worker_rng.sample_without_replacement(m, r));
    pl.load_per_worker.push_back(r);
  }
  return pl;
}

// Each worker picks one batch uniformly at random, using only its own
// substream (fully decentralised).
inline Placement bcc_place(int n, const BatchPartition& partition, const RngStream& rng) {
  if (n < 1) throw std::invalid_argument("bcc_place: n must be >= 1");
  if (partition.num_batches < 1) throw std::invalid_argument("bcc_place: empty partition");
  Placement pl;
  pl.n = n;
  pl.m = 0;
  for (const auto& b : partition.batches) pl.m += static_cast<int>(b.size());
  pl.assignments.reserve(static_cast<std::size_t>(n));
  pl.batch_choice.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RngStream worker_rng = rng.derive(static_cast<std::uint64_t>(i));
    const int pick = worker_rng.uniform_int(0, partition.num_batches - 1);
    pl.batch_choice.push_back(pick);
    pl.assignments.push_back(partition.batches[static_cast<std::size_t>(pick)]);
    pl.load_per_worker.push_back(
        static_cast<int>(partition.batches[static_cast<std::size_t>(pick)].size()));
  }
  return pl;
}

// Heterogeneous loads: worker i samples loads[i] distinct units. A zero load
// marks a worker excluded by the load optimizer.
inline Placement gbcc_place(const std::vector<int>& loads, int m, const RngStream& rng) {
  if (loads.empty()) throw std::invalid_argument("gbcc_place: loads must be non-empty");
  if (m < 1) throw std::invalid_argument("gbcc_place: m must be >= 1");
  for (int r : loads) {
    if (r < 0 || r > m) throw std::invalid_argument("gbcc_place: loads must be in [0, m]");
  }
  Placement pl;
  pl.n = static_cast<int>(loads.size());
  pl.m = m;
  pl.assignments.reserve(loads.size());
  for (int i = 0; i < pl.n; ++i) {
    RngStream worker_rng = rng.derive(static_cast<std::uint64_t>(i));
    pl.assignments.push_back(
        worker_rng.sample_without_replacement(m, loads[static_cast<std::size_t>(i)]));
    pl.load_per_worker.push_back(loads[static_cast<std::size_t>(i)]);
  }
  return pl;
}

// ---------------------------------------------------------------------------
// BCC encode / ingest / decode

// Sum of the batch's partial gradients; one gradient-sized message.
inline Message bcc_encode(const std::vector<std::vector<double>>& partial_gradients) {
  if (partial_gradients.empty()) throw std::invalid_argument("bcc_encode: empty gradient list");
  detail::check_payload_dims(partial_gradients);
  Message msg;
  std::vector<double> sum = partial_gradients[0];
  for (std::size_t i = 1; i < partial_gradients.size(); ++i) {
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += partial_gradients[i][j];
  }
  msg.payloads.push_back(std::move(sum));
  msg.size_units = 1;
  return msg;
}

// Duplicates are recorded (they count toward |W| and L) but their payload is
// discarded. Completion exactly when all batches are covered.
inline void bcc_ingest(DecodeState& state, Message msg) {
  if (msg.tag < 0 || msg.tag >= state.num_batches) {
    throw std::invalid_argument("bcc_ingest: message batch index out of range");
  }
  const auto b = static_cast<std::size_t>(msg.tag);
  if (!state.covered[b]) {
    state.covered[b] = 1;
    ++state.covered_count;
    if (!msg.payloads.empty()) {
      state.kept[b] = std::move(msg.payloads.front());
      ++state.kept_payloads;
    }
  }
  msg.payloads.clear();
  state.received.push_back(std::move(msg));
  state.complete = state.covered_count == state.num_batches;
}

inline std::vector<double> bcc_decode(const DecodeState& state) {
  if (!state.complete) throw std::logic_error("bcc_decode: state is not complete");
  std::vector<double> sum;
  for (int b = 0; b < state.num_batches; ++b) {
    const auto& payload = state.kept[static_cast<std::size_t>(b)];
    if (payload.empty()) throw std::invalid_argument("bcc_decode: missing payload for a batch");
    detail::add_into(sum, payload);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Cyclic repetition code

// n x m coefficient matrix (m == n) whose row i is nonzero exactly on the
// cyclic window {i, ..., i + r - 1 mod m}. Any m - r + 1 rows can be combined
// into the all-ones vector, which recovers the plain gradient sum.
struct CyclicCode {
  int n = 0;
  int r = 0;
  std::vector<double> coeff;  // row-major n x n

  double at(int i, int j) const { return coeff[static_cast<std::size_t>(i) * n + j]; }

  std::vector<int> support(int worker) const {
    std::vector<int> s(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) s[static_cast<std::size_t>(k)] = (worker + k) % n;
    std::sort(s.begin(), s.end());
    return s;
  }

  int threshold() const { return n - r + 1; }
};

// Combination coefficients a_S with a_S^T B[S,:] = (1,...,1), via the normal
// equations of the overdetermined transpose system. Residual reported in the
// max norm.
inline std::vector<double> cr_solve_combination(const CyclicCode& code,
                                                const std::vector<int>& workers,
                                                double* residual_out = nullptr) {
  const int k = static_cast<int>(workers.size());
  const int m = code.n;
  if (k < 1) throw std::invalid_argument("cr_solve_combination: empty worker set");
  // G = B_S B_S^T, rhs = B_S 1
  std::vector<double> G(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < k; ++i) {
    const double* row_i = code.coeff.data() + static_cast<std::size_t>(workers[static_cast<std::size_t>(i)]) * m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += row_i[j];
    rhs[static_cast<std::size_t>(i)] = acc;
    for (int l = i; l < k; ++l) {
      const double* row_l = code.coeff.data() + static_cast<std::size_t>(workers[static_cast<std::size_t>(l)]) * m;
      double dot = 0.0;
      for (int j = 0; j < m; ++j) dot += row_i[j] * row_l[j];
      G[static_cast<std::size_t>(i) * k + l] = dot;
      G[static_cast<std::size_t>(l) * k + i] = dot;
    }
  }
  std::vector<double> a = solve_dense(k, std::move(G), std::move(rhs));
  double residual = 0.0;
  for (int j = 0; j < m; ++j) {
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      acc += a[static_cast<std::size_t>(i)] * code.at(workers[static_cast<std::size_t>(i)], j);
    }
    residual = std::max(residual, std::fabs(acc - 1.0));
  }
  if (residual_out) *residual_out = residual;
  return a;
}

namespace detail {

constexpr double kCrResidualTol = 1e-8;
constexpr int kCrBuildRetries = 16;
constexpr long kCrExhaustiveLimit = 20000;

// Visit subsets of {0..n-1} of size k: all of them when there are at most
// kCrExhaustiveLimit, otherwise `samples` random ones.
template <typename Fn>
void for_each_worker_subset(int n, int k, RngStream& rng, int samples, Fn&& fn) {
  double total = 1.0;
  for (int i = 0; i < k; ++i) total *= static_cast<double>(n - i) / (i + 1);
  if (total <= static_cast<double>(kCrExhaustiveLimit)) {
    std::vector<int> subset(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
    for (;;) {
      if (!fn(subset)) return;
      int pos = k - 1;
      while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
      if (pos < 0) break;
      ++subset[static_cast<std::size_t>(pos)];
      for (int j = pos + 1; j < k; ++j) {
        subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  } else {
    for (int s = 0; s < samples; ++s) {
      if (!fn(rng.sample_without_replacement(n, k))) return;
    }
  }
}

}  // namespace detail

// Builds the coding matrix with standard-normal coefficients on the cyclic
// support and validates decodability over worker subsets of threshold size
// (exhaustively when feasible, sampled otherwise). Retries with fresh
// coefficients on a failed validation.
inline CyclicCode cr_build(int n, int r, const RngStream& rng) {
  if (n < 1) throw std::invalid_argument("cr_build: n must be >= 1");
  if (r < 1 || r > n) throw std::invalid_argument("cr_build: r must be in [1, n]");
  for (int attempt = 0; attempt < detail::kCrBuildRetries; ++attempt) {
    RngStream draw = rng.derive(static_cast<std::uint64_t>(attempt));
    CyclicCode code;
    code.n = n;
    code.r = r;
    code.coeff.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < r; ++k) {
        code.coeff[static_cast<std::size_t>(i) * n + (i + k) % n] = draw.normal();
      }
    }
    bool ok = true;
    RngStream subset_rng = draw.derive(0x5u);
    detail::for_each_worker_subset(n, code.threshold(), subset_rng, 64,
                                   [&](const std::vector<int>& subset) {
                                     double residual = 0.0;
                                     try {
                                       cr_solve_combination(code, subset, &residual);
                                     } catch (const std::runtime_error&) {
                                       residual = 1.0;
                                     }
                                     ok = residual <= detail::kCrResidualTol;
                                     return ok;
                                   });
    if (ok) return code;
  }
  throw std::runtime_error("cr_build: failed to construct a decodable code");
}

// Linear combination of the worker's partial gradients with its row
// coefficients, in support order.
inline Message cr_encode(const CyclicCode& code, int worker,
                         const std::vector<std::vector<double>>& partial_gradients) {
  if (worker < 0 || worker >= code.n) throw std::invalid_argument("cr_encode: worker out of range");
  const std::vector<int> support = code.support(worker);
  if (partial_gradients.size() != support.size()) {
    throw std::invalid_argument("cr_encode: gradients do not match the worker's support");
  }
  detail::check_payload_dims(partial_gradients);
  Message msg;
  msg.worker_id = worker;
  msg.tag = worker;
  std::vector<double> combo(partial_gradients[0].size(), 0.0);
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double c = code.at(worker, support[k]);
    for (std::size_t j = 0; j < combo.size(); ++j) combo[j] += c * partial_gradients[k][j];
  }
  msg.payloads.push_back(std::move(combo));
  msg.size_units = 1;
  return msg;
}

// Decode from exactly m - r + 1 distinct workers' coded messages.
inline std::vector<double> cr_decode(const CyclicCode& code, const std::vector<Message>& received) {
  if (static_cast<int>(received.size()) != code.threshold()) {
    throw std::invalid_argument("cr_decode: need exactly m - r + 1 messages");
  }
  std::vector<int> workers;
  workers.reserve(received.size());
  for (const auto& msg : received) {
    if (msg.tag < 0 || msg.tag >= code.n) throw std::invalid_argument("cr_decode: bad row tag");
    workers.push_back(msg.tag);
  }
  {
    std::vector<int> sorted = workers;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("cr_decode: duplicate worker rows");
    }
  }
  double residual = 0.0;
  const std::vector<double> a = cr_solve_combination(code, workers, &residual);
  if (residual > detail::kCrResidualTol) {
    throw std::runtime_error("cr_decode: combination residual above tolerance");
  }
  std::vector<double> sum;
  for (std::size_t i = 0; i < received.size(); ++i) {
    if (received[i].payloads.empty()) throw std::invalid_argument("cr_decode: missing payload");
    std::vector<double> scaled = received[i].payloads.front();
    for (double& v : scaled) v *= a[i];
    detail::add_into(sum, scaled);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Scheme interface used by the simulator and the trainer

class Scheme {
 public:
  virtual ~Scheme() = default;

  virtual SchemeId id() const = 0;
  virtual int workers() const = 0;
  virtual int units() const = 0;

  virtual Placement place(const RngStream& rng) const = 0;

  // Payload-carrying message; local_gradients aligns with the worker's
  // assignment list.
  virtual Message encode(const Placement& pl, int worker,
                         const std::vector<std::vector<double>>& local_gradients) const = 0;

  // Metadata-only message for count/time simulations.
  virtual Message stat_message(const Placement& pl, int worker) const = 0;

  virtual DecodeState new_state() const = 0;
  virtual void ingest(DecodeState& state, Message msg) const = 0;
  virtual std::vector<double> decode(const DecodeState& state) const = 0;

  std::string name() const { return scheme_name(id()); }
};

namespace detail {

inline void unit_coverage_ingest(DecodeState& state, Message msg) {
  if (msg.units.size() != msg.payloads.size() && !msg.payloads.empty()) {
    throw std::invalid_argument("ingest: units/payloads mismatch");
  }
  for (std::size_t k = 0; k < msg.units.size(); ++k) {
    const int unit = msg.units[k];
    if (unit < 0 || unit >= state.num_units) {
      throw std::invalid_argument("ingest: unit index out of range");
    }
    const auto u = static_cast<std::size_t>(unit);
    if (!state.covered[u]) {
      state.covered[u] = 1;
      ++state.covered_count;
      if (!msg.payloads.empty()) {
        state.kept[u] = std::move(msg.payloads[k]);
        ++state.kept_payloads;
      }
    }
  }
  msg.payloads.clear();
  state.received.push_back(std::move(msg));
  state.complete = state.covered_count == state.num_units;
}

inline std::vector<double> unit_coverage_decode(const DecodeState& state) {
  if (!state.complete) throw std::logic_error("decode: state is not complete");
  std::vector<double> sum;
  for (int u = 0; u < state.num_units; ++u) {
    const auto& payload = state.kept[static_cast<std::size_t>(u)];
    if (payload.empty()) throw std::invalid_argument("decode: missing payload for a unit");
    add_into(sum, payload);
  }
  return sum;
}

inline std::vector<std::vector<double>> checked_local(
    const Placement& pl, int worker, const std::vector<std::vector<double>>& grads) {
  const auto& units = pl.assignments[static_cast<std::size_t>(worker)];
  if (grads.size() != units.size()) {
    throw std::invalid_argument("encode: gradients do not match the worker's assignment");
  }
  check_payload_dims(grads);
  return grads;
}

}  // namespace detail

class UncodedScheme final : public Scheme {
 public:
  UncodedScheme(int n, int m) : n_(n), m_(m) { uncoded_place(n, m); }

  SchemeId id() const override { return SchemeId::kUncoded; }
  int workers() const override { return n_; }
  int units() const override { return m_; }

  Placement place(const RngStream&) const override { return uncoded_place(n_, m_); }

  Message encode(const Placement& pl, int worker,
                 const std::vector<std::vector<double>>& local_gradients) const override {
    detail::checked_local(pl, worker, local_gradients);
    Message msg = bcc_encode(local_gradients);  // plain summation, same as BCC
    msg.worker_id = worker;
    msg.tag = worker;
    return msg;
  }

  Message stat_message(const Placement&, int worker) const override {
    Message msg;
    msg.worker_id = worker;
    msg.tag = worker;
    msg.size_units = 1;
    return msg;
  }

  DecodeState new_state() const override {
    DecodeState st;
    st.scheme = id();
    st.num_workers = n_;
    st.num_units = m_;
    st.covered.assign(static_cast<std::size_t>(n_), 0);
    st.kept.resize(static_cast<std::size_t>(n_));
    return st;
  }

  void ingest(DecodeState& state, Message msg) const override {
    if (msg.tag < 0 || msg.tag >= state.num_workers) {
      throw std::invalid_argument("ingest: worker tag out of range");
    }
    const auto w = static_cast<std::size_t>(msg.tag);
    if (!state.covered[w]) {
      state.covered[w] = 1;
      ++state.covered_count;
      if (!msg.payloads.empty()) {
        state.kept[w] = std::move(msg.payloads.front());
        ++state.kept_payloads;
      }
    }
    msg.payloads.clear();
    state.received.push_back(std::move(msg));
    state.complete = state.covered_count == state.num_workers;
  }

  std::vector<double> decode(const DecodeState& state) const override {
    if (!state.complete) throw std::logic_error("decode: state is not complete");
    std::vector<double> sum;
    for (int w = 0; w < n_; ++w) {
      const auto& payload = state.kept[static_cast<std::size_t>(w)];
      if (payload.empty()) throw std::invalid_argument("decode: missing payload for a worker");
      detail::add_into(sum, payload);
    }
    return sum;
  }

 private:
  int n_;
  int m_;
};

class RandomScheme final : public Scheme {
 public:
  RandomScheme(int n, int m, int r) : n_(n), m_(m), r_(r) {
    if (n < 1) throw std::invalid_argument("random scheme: n must be >= 1");
    if (r < 1 || r > m) throw std::invalid_argument("random scheme: r must be in [1, m]");
  }

  SchemeId id() const override { return SchemeId::kRandom; }
  int workers() const override { return n_; }
  int units() const override { return m_; }

  Placement place(const RngStream& rng) const override { return random_place(n_, m_, r_, rng); }

  Message encode(const Placement& pl, int worker,
                 const std::vector<std::vector<double>>& local_gradients) const override {
    detail::checked_local(pl, worker, local_gradients);
    Message msg;
    msg.worker_id = worker;
    msg.units = pl.assignments[static_cast<std::size_t>(worker)];
    msg.payloads = local_gradients;
    msg.size_units = static_cast<int>(msg.units.size());
    return msg;
  }

  Message stat_message(const Placement& pl, int worker) const override {
    Message msg;
    msg.worker_id = worker;
    msg.units = pl.assignments[static_cast<std::size_t>(worker)];
    msg.size_units = static_cast<int>(msg.units.size());
    return msg;
  }

  DecodeState new_state() const override {
    DecodeState st;
    st.scheme = id();
    st.num_workers = n_;
    st.num_units = m_;
    st.covered.assign(static_cast<std::size_t>(m_), 0);
    st.kept.resize(static_cast<std::size_t>(m_));
    return st;
  }

  void ingest(DecodeState& state, Message msg) const override {
    detail::unit_coverage_ingest(state, std::move(msg));
  }

  std::vector<double> decode(const DecodeState& state) const override {
    return detail::unit_coverage_decode(state);
  }

 private:
  int n_;
  int m_;
  int r_;
};

class CyclicRepetitionScheme final : public Scheme {
 public:
  explicit CyclicRepetitionScheme(CyclicCode code) : code_(std::move(code)) {}

  SchemeId id() const override { return SchemeId::kCyclicRepetition; }
  int workers() const override { return code_.n; }
  int units() const override { return code_.n; }
  const CyclicCode& code() const { return code_; }

  Placement place(const RngStream&) const override {
    Placement pl;
    pl.n = code_.n;
    pl.m = code_.n;
    pl.assignments.reserve(static_cast<std::size_t>(code_.n));
    for (int i = 0; i < code_.n; ++i) {
      pl.assignments.push_back(code_.support(i));
      pl.load_per_worker.push_back(code_.r);
    }
    return pl;
  }

  Message encode(const Placement& pl, int worker,
                 const std::vector<std::vector<double>>& local_gradients) const override {
    detail::checked_local(pl, worker, local_gradients);
    return cr_encode(code_, worker, local_gradients);
  }

  Message stat_message(const Placement&, int worker) const override {
    Message msg;
    msg.worker_id = worker;
    msg.tag = worker;
    msg.size_units = 1;
    return msg;
  }

  DecodeState new_state() const override {
    DecodeState st;
    st.scheme = id();
    st.num_workers = code_.n;
    st.num_units = code_.n;
    st.threshold = code_.threshold();
    st.covered.assign(static_cast<std::size_t>(code_.n), 0);
    return st;
  }

  void ingest(DecodeState& state, Message msg) const override {
    if (msg.tag < 0 || msg.tag >= state.num_workers) {
      throw std::invalid_argument("ingest: worker tag out of range");
    }
    const auto w = static_cast<std::size_t>(msg.tag);
    if (!state.covered[w]) {
      state.covered[w] = 1;
      ++state.covered_count;
    }
    state.received.push_back(std::move(msg));
    state.complete = state.covered_count >= state.threshold;
  }

  std::vector<double> decode(const DecodeState& state) const override {
    if (!state.complete) throw std::logic_error("decode: state is not complete");
    // First threshold-many distinct workers, in arrival order.
    std::vector<Message> first;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(code_.n), 0);
    for (const auto& msg : state.received) {
      if (seen[static_cast<std::size_t>(msg.tag)]) continue;
      seen[static_cast<std::size_t>(msg.tag)] = 1;
      first.push_back(msg);
      if (static_cast<int>(first.size()) == state.threshold) break;
    }
    return cr_decode(code_, first);
  }

 private:
  CyclicCode code_;
};

class BccScheme final : public Scheme {
 public:
  BccScheme(int n, BatchPartition partition) : n_(n), partition_(std::move(partition)) {
    if (n < 1) throw std::invalid_argument("bcc scheme: n must be >= 1");
    m_ = 0;
    for (const auto& b : partition_.batches) m_ += static_cast<int>(b.size());
  }

  SchemeId id() const override { return SchemeId::kBcc; }
  int workers() const override { return n_; }
  int units() const override { return m_; }
  const BatchPartition& partition() const { return partition_; }

  Placement place(const RngStream& rng) const override { return bcc_place(n_, partition_, rng); }

  Message encode(const Placement& pl, int worker,
                 const std::vector<std::vector<double>>& local_gradients) const override {
    detail::checked_local(pl, worker, local_gradients);
    Message msg = bcc_encode(local_gradients);
    msg.worker_id = worker;
    msg.tag = pl.batch_choice[static_cast<std::size_t>(worker)];
    return msg;
  }

  Message stat_message(const Placement& pl, int worker) const override {
    Message msg;
    msg.worker_id = worker;
    msg.tag = pl.batch_choice[static_cast<std::size_t>(worker)];
    msg.size_units = 1;
    return msg;
  }

  DecodeState new_state() const override {
    DecodeState st;
    st.scheme = id();
    st.num_workers = n_;
    st.num_units = m_;
    st.num_batches = partition_.num_batches;
    st.covered.assign(static_cast<std::size_t>(partition_.num_batches), 0);
    st.kept.resize(static_cast<std::size_t>(partition_.num_batches));
    return st;
  }

  void ingest(DecodeState& state, Message msg) const override { bcc_ingest(state, std::move(msg)); }

  std::vector<double> decode(const DecodeState& state) const override { return bcc_decode(state); }

 private:
  int n_;
  int m_ = 0;
  BatchPartition partition_;
};

class GeneralizedBccScheme final : public Scheme {
 public:
  GeneralizedBccScheme(std::vector<int> loads, int m) : loads_(std::move(loads)), m_(m) {
    if (loads_.empty()) throw std::invalid_argument("gbcc scheme: loads must be non-empty");
    for (int r : loads_) {
      if (r < 0 || r > m) throw std::invalid_argument("gbcc scheme: loads must be in [0, m]");
    }
  }

  SchemeId id() const override { return SchemeId::kGeneralizedBcc; }
  int workers() const override { return static_cast<int>(loads_.size()); }
  int units() const override { return m_; }
  const std::vector<int>& loads() const { return loads_; }

  Placement place(const RngStream& rng) const override { return gbcc_place(loads_, m_, rng); }

  Message encode(const Placement& pl, int worker,
                 const std::vector<std::vector<double>>& local_gradients) const override {
    detail::checked_local(pl, worker, local_gradients);
    Message msg;
    msg.worker_id = worker;
    msg.units = pl.assignments[static_cast<std::size_t>(worker)];
    msg.payloads = local_gradients;
    msg.size_units = static_cast<int>(msg.units.size());
    return msg;
  }

  Message stat_message(const Placement& pl, int worker) const override {
    Message msg;
    msg.worker_id = worker;
    msg.units = pl.assignments[static_cast<std::size_t>(worker)];
    msg.size_units = static_cast<int>(msg.units.size());
    return msg;
  }

  DecodeState new_state() const override {
    DecodeState st;
    st.scheme = id();
    st.num_workers = workers();
    st.num_units = m_;
    st.covered.assign(static_cast<std::size_t>(m_), 0);
    st.kept.resize(static_cast<std::size_t>(m_));
    return st;
  }

  void ingest(DecodeState& state, Message msg) const override {
    detail::unit_coverage_ingest(state, std::move(msg));
  }

  std::vector<double> decode(const DecodeState& state) const override {
    return detail::unit_coverage_decode(state);
  }

 private:
  std::vector<int> loads_;
  int m_;
};

// Factory for the homogeneous schemes driven from experiment configs. CR
// builds (and validates) its code from `code_rng`.
inline std::unique_ptr<Scheme> make_scheme(SchemeId id, int n, int m, int r,
                                           const RngStream& code_rng) {
  switch (id) {
    case SchemeId::kUncoded:
      return std::make_unique<UncodedScheme>(n, m);
    case SchemeId::kRandom:
      return std::make_unique<RandomScheme>(n, m, r);
    case SchemeId::kCyclicRepetition:
      if (m != n) {
        throw std::invalid_argument(
            "cr: requires units == n (group examples into n super-examples first)");
      }
      return std::make_unique<CyclicRepetitionScheme>(cr_build(n, r, code_rng));
    case SchemeId::kBcc:
      return std::make_unique<BccScheme>(n, partition_batches(m, r));
    case SchemeId::kGeneralizedBcc:
      throw std::invalid_argument("gbcc: construct with explicit per-worker loads");
  }
  throw std::logic_error("unknown scheme id");
}

inline void export_placement_csv(const Placement& pl, const std::string& path) {
  csv::Writer out(path);
  out.row({"worker_id", "unit_index"});
  for (int i = 0; i < pl.n; ++i) {
    for (int u : pl.assignments[static_cast<std::size_t>(i)]) {
      out.row({csv::num(i), csv::num(u)});
    }
  }
}

inline void export_code_csv(const CyclicCode& code, const std::string& path) {
  csv::Writer out(path);
  std::vector<std::string> header;
  header.reserve(static_cast<std::size_t>(code.n));
  for (int j = 0; j < code.n; ++j) header.push_back("u" + std::to_string(j));
  out.row(header);
  std::vector<std::string> cells(static_cast<std::size_t>(code.n));
  for (int i = 0; i < code.n; ++i) {
    for (int j = 0; j < code.n; ++j) cells[static_cast<std::size_t>(j)] = csv::num_full(code.at(i, j));
    out.row(cells);
  }
}

}  // namespace bcc
