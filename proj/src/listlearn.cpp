#include "selectorlab/listlearn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "selectorlab/parallel.hpp"

namespace selectorlab {

namespace {

constexpr double kDedupTolerance = 1e-9;

// Keeps one representative per cluster of weight vectors that agree within
// kDedupTolerance in every coordinate. Lookups scan the 3^s neighboring cells.
class WeightDeduper {
 public:
  explicit WeightDeduper(std::size_t s) : s_(s) {}

  bool insert(const std::vector<double>& w) {
    std::vector<double> cell(s_);
    for (std::size_t j = 0; j < s_; ++j) cell[j] = std::floor(w[j] / kDedupTolerance);
    std::vector<double> probe(s_);
    std::size_t offsets = 1;
    for (std::size_t j = 0; j < s_; ++j) offsets *= 3;
    for (std::size_t o = 0; o < offsets; ++o) {
      std::size_t code = o;
      for (std::size_t j = 0; j < s_; ++j) {
        probe[j] = cell[j] + static_cast<double>(code % 3) - 1.0;
        code /= 3;
      }
      auto it = cells_.find(probe);
      if (it == cells_.end()) continue;
      for (const auto& kept : it->second) {
        bool same = true;
        for (std::size_t j = 0; j < s_ && same; ++j) same = std::abs(kept[j] - w[j]) <= kDedupTolerance;
        if (same) return false;
      }
    }
    cells_[cell].push_back(w);
    return true;
  }

 private:
  std::size_t s_;
  std::map<std::vector<double>, std::vector<std::vector<double>>> cells_;
};

struct TupleOutput {
  std::vector<SparseLinearClassifier> members;
  std::vector<std::vector<std::size_t>> examples;
  std::size_t solved = 0;
  std::size_t duplicates = 0;
};

}  // namespace

void SparseListConfig::validate(std::size_t d, std::size_t available) const {
  if (s < 1) throw std::invalid_argument("SparseListConfig: s must be >= 1");
  if (m < 1) throw std::invalid_argument("SparseListConfig: m must be >= 1");
  if (s > d) throw std::invalid_argument("SparseListConfig: s exceeds the dimension");
  if (m > available) throw std::invalid_argument("SparseListConfig: m exceeds the dataset size");
  if (!(nu > 0.0)) throw std::invalid_argument("SparseListConfig: nu must be positive");
  if (!(condition_cutoff > 1.0)) throw std::invalid_argument("SparseListConfig: bad condition cutoff");
}

bool SparseLinearClassifier::predict(const ConstVec& x) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < support.size(); ++j)
    sum += weights[j] * x[static_cast<Eigen::Index>(support[j])];
  return sum >= kThreshold;
}

Classifier SparseLinearClassifier::to_classifier() const {
  return Classifier::sparse_linear(support, weights, kThreshold);
}

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::size_t enumerated_systems(std::size_t d, std::size_t m, std::size_t s) {
  auto choose = [](std::size_t n, std::size_t k) {
    if (k > n) return std::size_t{0};
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return static_cast<std::size_t>(std::llround(r));
  };
  return choose(d, s) * choose(m, s);
}

SparseList sparse_list(const Dataset& data, const SparseListConfig& cfg) {
  cfg.validate(data.dim(), data.size());
  const std::size_t s = cfg.s;
  const auto coord_tuples = combinations(data.dim(), s);
  const auto example_tuples = combinations(cfg.m, s);

  std::vector<double> ypm(cfg.m);
  for (std::size_t j = 0; j < cfg.m; ++j) ypm[j] = data.y(j) ? 1.0 : -1.0;

  std::vector<TupleOutput> outputs(coord_tuples.size());
  parallel_for(coord_tuples.size(), [&](std::size_t ci) {
    const auto& coords = coord_tuples[ci];
    TupleOutput& out = outputs[ci];
    WeightDeduper dedup(s);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
    Eigen::VectorXd b(static_cast<Eigen::Index>(s));
    for (const auto& rows : example_tuples) {
      for (std::size_t r = 0; r < s; ++r) {
        const double y = ypm[rows[r]];
        for (std::size_t c = 0; c < s; ++c)
          a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              y * data.features()(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(coords[c]));
        b[static_cast<Eigen::Index>(r)] = y - cfg.nu;
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      const double smax = sv[0];
      const double smin = sv[sv.size() - 1];
      if (!(smin > 0.0) || smax / smin > cfg.condition_cutoff) continue;
      const Eigen::VectorXd w = svd.solve(b);
      if (!w.allFinite()) continue;
      ++out.solved;
      std::vector<double> weights(w.data(), w.data() + w.size());
      if (cfg.dedup && !dedup.insert(weights)) {
        ++out.duplicates;
        continue;
      }
      out.members.push_back({coords, std::move(weights)});
      out.examples.push_back(rows);
    }
  });

  SparseList list;
  list.systems_enumerated = coord_tuples.size() * example_tuples.size();
  for (auto& o : outputs) {
    list.systems_solved += o.solved;
    list.duplicates_removed += o.duplicates;
    for (std::size_t i = 0; i < o.members.size(); ++i) {
      list.members.push_back(std::move(o.members[i]));
      list.example_tuples.push_back(std::move(o.examples[i]));
    }
  }
  return list;
}

std::size_t list_sample_size(double alpha, double epsilon, double delta, std::size_t s,
                             std::size_t d, double constant) {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(alpha) || !in_unit(epsilon) || !in_unit(delta))
    throw std::invalid_argument("list_sample_size: alpha, epsilon, delta must lie in (0, 1]");
  if (s < 1 || d < 1 || !(constant > 0.0))
    throw std::invalid_argument("list_sample_size: s, d and constant must be positive");
  const double m = constant *
                   (static_cast<double>(s) * std::log(static_cast<double>(d)) + std::log(1.0 / delta)) /
                   (alpha * epsilon);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(m - 1e-9)));
}

std::vector<Classifier> to_classifiers(const SparseList& list) {
  std::vector<Classifier> out;
  out.reserve(list.size());
  for (const auto& m : list.members) out.push_back(m.to_classifier());
  return out;
}

void write_list_jsonl(std::ostream& os, const SparseList& list) {
  for (const auto& m : list.members) {
    nlohmann::json j{{"support", m.support},
                     {"weights", m.weights},
                     {"threshold", SparseLinearClassifier::kThreshold}};
    os << j.dump() << '\n';
  }
}

SparseLinearClassifier random_sparse_truth(Rng& rng, std::size_t d, std::size_t s) {
  if (s < 1 || s > d) throw std::invalid_argument("random_sparse_truth: need 1 <= s <= d");
  // Partial Fisher-Yates for the support.
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  for (std::size_t i = 0; i < s; ++i) std::swap(idx[i], idx[i + rng.below(d - i)]);
  std::vector<std::size_t> support(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s));
  std::sort(support.begin(), support.end());
  std::vector<double> w(s);
  double norm = 0.0;
  for (auto& x : w) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : w) x *= 2.0 / norm;
  return {std::move(support), std::move(w)};
}

namespace {

double sparse_score(const SparseLinearClassifier& c, const double* row) {
  double sum = 0.0;
  for (std::size_t j = 0; j < c.support.size(); ++j) sum += c.weights[j] * row[c.support[j]];
  return sum;
}

void draw_inlier(Rng& rng, const SparseLinearClassifier& truth, double margin, double* row, std::size_t d,
                 std::uint8_t& y) {
  for (std::size_t tries = 0;; ++tries) {
    if (tries > 100000) throw std::runtime_error("sparse inliers: margin rejects almost every draw");
    for (std::size_t j = 0; j < d; ++j) row[j] = rng.normal();
    const double score = sparse_score(truth, row);
    if (std::abs(score - SparseLinearClassifier::kThreshold) >= margin) {
      y = score >= SparseLinearClassifier::kThreshold ? 1 : 0;
      return;
    }
  }
}

}  // namespace

SparseInstance planted_sparse_instance(Rng& rng, const SparseLinearClassifier& truth, std::size_t d,
                                       std::size_t n, double alpha, double margin) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("planted_sparse_instance: alpha must lie in (0, 1]");
  if (!(margin >= 0.0)) throw std::invalid_argument("planted_sparse_instance: margin must be >= 0");
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::uint8_t> y(n), inlier(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.data() + i * d;
    inlier[i] = rng.bernoulli(alpha);
    if (inlier[i]) {
      draw_inlier(rng, truth, margin, row, d, y[i]);
    } else {
      for (std::size_t j = 0; j < d; ++j) row[j] = rng.normal();
      y[i] = rng.bernoulli(0.5);
    }
  }
  return {Dataset(std::move(x), std::move(y)), std::move(inlier), truth};
}

Dataset sample_sparse_inliers(Rng& rng, const SparseLinearClassifier& truth, std::size_t d, std::size_t n,
                              double margin) {
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::uint8_t> y(n);
  for (std::size_t i = 0; i < n; ++i) draw_inlier(rng, truth, margin, x.data() + i * d, d, y[i]);
  return Dataset(std::move(x), std::move(y));
}

double agreement(const SparseLinearClassifier& a, const SparseLinearClassifier& b, const Dataset& data) {
  if (data.empty()) throw EmptyDataset("agreement: empty dataset");
  std::size_t same = 0;
  for (std::size_t i = 0; i < data.size(); ++i) same += a.predict(data.x(i)) == b.predict(data.x(i));
  return static_cast<double>(same) / static_cast<double>(data.size());
}

}  // namespace selectorlab
