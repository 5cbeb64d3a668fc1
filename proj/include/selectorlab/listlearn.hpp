#ifndef SELECTORLAB_LISTLEARN_HPP
#define SELECTORLAB_LISTLEARN_HPP

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "selectorlab/core.hpp"

namespace selectorlab {

struct SparseListConfig {
  std::size_t s = 1;
  std::size_t m = 1;
  double nu = 1e-3;
  bool dedup = true;
  /// Systems whose condition number exceeds this are treated as singular.
  double condition_cutoff = 1e10;

  void validate(std::size_t d, std::size_t available) const;
};

/// Predicts 1 iff sum_j weights[j] * x[support[j]] >= 1.
struct SparseLinearClassifier {
  static constexpr double kThreshold = 1.0;

  std::vector<std::size_t> support;  // strictly increasing
  std::vector<double> weights;

  bool predict(const ConstVec& x) const;
  Classifier to_classifier() const;
};

struct SparseList {
  std::vector<SparseLinearClassifier> members;
  /// Example indices of the system that produced each member.
  std::vector<std::vector<std::size_t>> example_tuples;
  std::size_t systems_enumerated = 0;
  std::size_t systems_solved = 0;
  std::size_t duplicates_removed = 0;

  std::size_t size() const { return members.size(); }
};

/// Enumerates every s-subset of coordinates and every s-subset of the first
/// m examples (distinct, unordered), solves
///   y_j <w, x_j restricted to the coordinates> = y_j - nu   (y in {-1, +1})
/// and keeps each well-conditioned solution. Output order is lexicographic
/// over (coordinate tuple, example tuple).
SparseList sparse_list(const Dataset& data, const SparseListConfig& cfg);

/// C(d, s) * C(m, s): the number of systems sparse_list enumerates.
std::size_t enumerated_systems(std::size_t d, std::size_t m, std::size_t s);

/// ceil(constant * (s ln d + ln(1/delta)) / (alpha * epsilon)).
std::size_t list_sample_size(double alpha, double epsilon, double delta, std::size_t s,
                             std::size_t d, double constant);

std::vector<Classifier> to_classifiers(const SparseList& list);

/// One {support, weights, threshold} object per line.
void write_list_jsonl(std::ostream& os, const SparseList& list);

/// Planted s-sparse instance over N(0, I_d). Inliers carry the reference
/// label and are redrawn until |<w*, x> - 1| >= margin; outliers get fair
/// coin labels. Each example is an inlier with probability alpha.
struct SparseInstance {
  Dataset data;
  std::vector<std::uint8_t> inlier;
  SparseLinearClassifier truth;
};

/// Reference with a uniform random support and weights of norm 2.
SparseLinearClassifier random_sparse_truth(Rng& rng, std::size_t d, std::size_t s);
SparseInstance planted_sparse_instance(Rng& rng, const SparseLinearClassifier& truth, std::size_t d,
                                       std::size_t n, double alpha, double margin);
/// Margin-separated inliers only.
Dataset sample_sparse_inliers(Rng& rng, const SparseLinearClassifier& truth, std::size_t d, std::size_t n,
                              double margin);

/// Fraction of `data` on which the two classifiers agree.
double agreement(const SparseLinearClassifier& a, const SparseLinearClassifier& b, const Dataset& data);

/// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k);

}  // namespace selectorlab

#endif
