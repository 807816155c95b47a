#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcc/csv.hpp"
#include "bcc/rng.hpp"

namespace bcc {

// Synthetic logistic-regression training set: a two-component Gaussian
// mixture with means +-(1.5/p) w* and labels y ~ Ber(kappa) on {-1,+1},
// kappa = 1 / (exp(x.w*) + 1).
struct TrainingSet {
  int p = 0;  // features per example
  int d = 0;  // examples
  std::uint64_t seed = 0;
  std::vector<double> features;  // row-major, d x p
  std::vector<int> labels;       // each -1 or +1
  std::vector<int> true_weights; // each -1 or +1, length p

  double feature(int example, int j) const {
    return features[static_cast<std::size_t>(example) * p + j];
  }
  const double* example(int i) const { return features.data() + static_cast<std::size_t>(i) * p; }
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {
constexpr std::uint64_t kWeightsStream = 1;
constexpr std::uint64_t kExampleStream = 2;
}  // namespace detail

// Deterministic in (p, d, seed); example i draws only from the substream
// keyed by i, so generation could be parallelised without changing output.
inline TrainingSet generate_dataset(int p, int d, std::uint64_t seed) {
  if (p < 1) throw std::invalid_argument("generate_dataset: p must be >= 1");
  if (d < 1) throw std::invalid_argument("generate_dataset: d must be >= 1");

  TrainingSet ts;
  ts.p = p;
  ts.d = d;
  ts.seed = seed;
  ts.true_weights.resize(static_cast<std::size_t>(p));
  ts.features.resize(static_cast<std::size_t>(p) * d);
  ts.labels.resize(static_cast<std::size_t>(d));

  RngStream root(seed);
  RngStream wrng = root.derive(detail::kWeightsStream);
  for (int j = 0; j < p; ++j) {
    ts.true_weights[static_cast<std::size_t>(j)] = wrng.uniform01() < 0.5 ? -1 : 1;
  }

  const double scale = 1.5 / static_cast<double>(p);
  const RngStream examples = root.derive(detail::kExampleStream);
  for (int i = 0; i < d; ++i) {
    RngStream ex = examples.derive(static_cast<std::uint64_t>(i));
    const double mixture_sign = ex.uniform01() < 0.5 ? 1.0 : -1.0;
    double margin = 0.0;  // x . w*
    double* row = ts.features.data() + static_cast<std::size_t>(i) * p;
    for (int j = 0; j < p; ++j) {
      const double w = static_cast<double>(ts.true_weights[static_cast<std::size_t>(j)]);
      row[j] = mixture_sign * scale * w + ex.normal();
      margin += row[j] * w;
    }
    const double kappa = sigmoid(-margin);  // 1 / (exp(margin) + 1)
    ts.labels[static_cast<std::size_t>(i)] = ex.uniform01() < kappa ? 1 : -1;
  }
  return ts;
}

// Contiguous index batches of size r over {0..m-1}; the last batch may be
// short. padded_count virtual examples complete it conceptually and always
// contribute zero partial gradients.
struct BatchPartition {
  int num_batches = 0;
  int batch_size = 0;
  int padded_count = 0;
  std::vector<std::vector<int>> batches;
};

inline BatchPartition partition_batches(int m, int r) {
  if (m < 1) throw std::invalid_argument("partition_batches: m must be >= 1");
  if (r < 1 || r > m) throw std::invalid_argument("partition_batches: r must be in [1, m]");
  BatchPartition part;
  part.batch_size = r;
  part.num_batches = (m + r - 1) / r;
  part.padded_count = part.num_batches * r - m;
  part.batches.resize(static_cast<std::size_t>(part.num_batches));
  for (int b = 0; b < part.num_batches; ++b) {
    const int lo = b * r;
    const int hi = std::min(m, lo + r);
    auto& batch = part.batches[static_cast<std::size_t>(b)];
    batch.reserve(static_cast<std::size_t>(hi - lo));
    for (int j = lo; j < hi; ++j) batch.push_back(j);
  }
  return part;
}

// Nearly even contiguous split of {0..count-1} into `parts` ranges; earlier
// parts take the extra element.
inline std::vector<std::vector<int>> even_split(int count, int parts) {
  if (count < 0) throw std::invalid_argument("even_split: count must be >= 0");
  if (parts < 1) throw std::invalid_argument("even_split: parts must be >= 1");
  std::vector<std::vector<int>> out(static_cast<std::size_t>(parts));
  const int base = count / parts;
  const int extra = count % parts;
  int next = 0;
  for (int i = 0; i < parts; ++i) {
    const int size = base + (i < extra ? 1 : 0);
    auto& part = out[static_cast<std::size_t>(i)];
    part.reserve(static_cast<std::size_t>(size));
    for (int j = 0; j < size; ++j) part.push_back(next++);
  }
  return out;
}

// CSV export: header y,x1,...,xp plus a key=value sidecar carrying
// p, d, seed and the true weight vector. Full precision so that
// import reproduces the dataset bit for bit.
inline void export_dataset(const TrainingSet& ts, const std::string& csv_path,
                           const std::string& meta_path) {
  csv::Writer out(csv_path);
  std::vector<std::string> header;
  header.reserve(static_cast<std::size_t>(ts.p) + 1);
  header.emplace_back("y");
  for (int j = 1; j <= ts.p; ++j) header.push_back("x" + std::to_string(j));
  out.row(header);
  std::vector<std::string> cells(static_cast<std::size_t>(ts.p) + 1);
  for (int i = 0; i < ts.d; ++i) {
    cells[0] = std::to_string(ts.labels[static_cast<std::size_t>(i)]);
    for (int j = 0; j < ts.p; ++j) {
      cells[static_cast<std::size_t>(j) + 1] = csv::num_full(ts.feature(i, j));
    }
    out.row(cells);
  }

  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw std::runtime_error("cannot open output file: " + meta_path);
  meta << "p = " << ts.p << '\n';
  meta << "d = " << ts.d << '\n';
  meta << "seed = " << ts.seed << '\n';
  meta << "true_weights = [";
  for (int j = 0; j < ts.p; ++j) {
    if (j) meta << ',';
    meta << ts.true_weights[static_cast<std::size_t>(j)];
  }
  meta << "]\n";
}

inline TrainingSet import_dataset(const std::string& csv_path, const std::string& meta_path) {
  TrainingSet ts;
  {
    std::ifstream meta(meta_path);
    if (!meta) throw std::runtime_error("cannot open input file: " + meta_path);
    std::string line;
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      const auto strip = [](std::string& s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
      };
      strip(key);
      strip(value);
      if (key == "p") ts.p = std::stoi(value);
      else if (key == "d") ts.d = std::stoi(value);
      else if (key == "seed") ts.seed = std::stoull(value);
      else if (key == "true_weights") {
        if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
          throw std::runtime_error("malformed true_weights in " + meta_path);
        }
        for (const auto& cell : csv::split_line(value.substr(1, value.size() - 2))) {
          ts.true_weights.push_back(std::stoi(cell));
        }
      }
    }
  }
  if (ts.p < 1 || ts.d < 1 || static_cast<int>(ts.true_weights.size()) != ts.p) {
    throw std::runtime_error("incomplete dataset metadata in " + meta_path);
  }

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open input file: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + csv_path);
  ts.features.reserve(static_cast<std::size_t>(ts.p) * ts.d);
  ts.labels.reserve(static_cast<std::size_t>(ts.d));
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = csv::split_line(line);
    if (static_cast<int>(cells.size()) != ts.p + 1) {
      throw std::runtime_error("bad dataset row width in " + csv_path);
    }
    ts.labels.push_back(std::stoi(cells[0]));
    for (int j = 1; j <= ts.p; ++j) {
      ts.features.push_back(std::stod(cells[static_cast<std::size_t>(j)]));
    }
  }
  if (static_cast<int>(ts.labels.size()) != ts.d) {
    throw std::runtime_error("dataset row count does not match metadata in " + csv_path);
  }
  return ts;
}

}  // namespace bcc
