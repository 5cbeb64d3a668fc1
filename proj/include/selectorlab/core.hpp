#ifndef SELECTORLAB_CORE_HPP
#define SELECTORLAB_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "selectorlab/rng.hpp"

namespace selectorlab {

using Vector = Eigen::VectorXd;
using ConstVec = Eigen::Ref<const Eigen::VectorXd>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyDataset : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a selector contains no example of the data it is evaluated on.
class EmptySelection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_same_dim(std::size_t a, std::size_t b, const char* what);

/// A direction in R^d, normalized on construction.
class UnitVector {
 public:
  /// Normalizes `v`; throws std::invalid_argument for the zero vector or
  /// non-finite entries.
  explicit UnitVector(const Vector& v);

  static UnitVector basis(std::size_t d, std::size_t axis);
  static UnitVector random(Rng& rng, std::size_t d);

  const Vector& vec() const { return v_; }
  std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
  double operator[](std::size_t i) const { return v_[static_cast<Eigen::Index>(i)]; }

  UnitVector operator-() const;

 private:
  Vector v_;
};

/// {x : <x, w> - t >= 0}; boundary points are members.
struct Halfspace {
  UnitVector w;
  double t = 0.0;

  static Halfspace homogeneous(UnitVector normal) { return {std::move(normal), 0.0}; }

  bool is_homogeneous() const { return t == 0.0; }
  bool contains(const ConstVec& x) const { return x.dot(w.vec()) - t >= 0.0; }
};

/// Binary classifier over R^d. Rules are immutable and cheap to copy.
class Classifier {
 public:
  struct ConstantRule {
    bool label;
  };
  /// 1 iff <w, x> >= t.
  struct LinearRule {
    Vector w;
    double t;
  };
  /// 1 iff sum_j weights[j] * x[support[j]] >= t.
  struct SparseLinearRule {
    std::vector<std::size_t> support;
    std::vector<double> weights;
    double t;
  };
  /// Exact lookup on a finite support with a fallback label elsewhere.
  struct TableRule {
    std::map<std::vector<double>, bool> entries;
    bool fallback;
  };
  struct NegatedRule {
    std::shared_ptr<const Classifier> inner;
  };
  using Rule = std::variant<ConstantRule, LinearRule, SparseLinearRule, TableRule, NegatedRule>;

  static Classifier constant(bool label);
  static Classifier linear(Vector w, double t);
  static Classifier sparse_linear(std::vector<std::size_t> support, std::vector<double> weights,
                                  double t);
  static Classifier table(std::map<std::vector<double>, bool> entries, bool fallback);
  static Classifier negation(const Classifier& inner);

  bool predict(const ConstVec& x) const;
  const Rule& rule() const { return rule_; }
  std::string describe() const;

 private:
  explicit Classifier(Rule r) : rule_(std::move(r)) {}
  Rule rule_;
};

/// Labeled sample with a shared feature dimension. Features are stored
/// row-major so each example is a contiguous row.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix features, std::vector<std::uint8_t> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  bool empty() const { return labels_.empty(); }

  auto x(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)).transpose(); }
  std::uint8_t y(std::size_t i) const { return labels_[i]; }

  const Matrix& features() const { return features_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  Dataset head(std::size_t n) const;
  Dataset with_labels(std::vector<std::uint8_t> labels) const;

 private:
  Matrix features_;
  std::vector<std::uint8_t> labels_;
};

/// Lazy view of a dataset relabeled to the error indicator 1[c(x) != y].
/// Neither the dataset nor the classifier is copied; both must outlive the view.
class ErrorDistribution {
 public:
  ErrorDistribution(const Dataset& base, const Classifier& c) : base_(&base), c_(&c) {}

  std::size_t size() const { return base_->size(); }
  std::size_t dim() const { return base_->dim(); }
  auto x(std::size_t i) const { return base_->x(i); }
  std::uint8_t e(std::size_t i) const {
    return static_cast<std::uint8_t>(c_->predict(base_->x(i)) != (base_->y(i) != 0));
  }
  const Dataset& base() const { return *base_; }
  const Classifier& classifier() const { return *c_; }

 private:
  const Dataset* base_;
  const Classifier* c_;
};

/// Ground-truth generator: Gaussian x, error rate p_in inside H_v and p_out
/// outside it, relative to the reference classifier c_star.
struct PlantedModel {
  std::size_t d;
  UnitVector v;
  Classifier c_star;
  double p_in;
  double p_out;
  std::uint64_t seed;

  void validate() const;
};

Dataset sample_gaussian(Rng& rng, std::size_t d, std::size_t n);
Dataset sample_planted(const PlantedModel& model, std::size_t n);
Dataset sample_planted(const PlantedModel& model, std::size_t n, Rng& rng);

Vector project_orthogonal(const ConstVec& x, const UnitVector& w);
double angle(const UnitVector& u, const UnitVector& w);

/// Empirical P[x in h and c(x) != y].
double joint_error(const Dataset& data, const Classifier& c, const Halfspace& h);
/// Empirical P[x in h].
double selection_rate(const Dataset& data, const Halfspace& h);
/// Empirical P[c(x) != y | x in h]; throws EmptySelection when h selects nothing.
double conditional_error(const Dataset& data, const Classifier& c, const Halfspace& h);

struct SelectionStats {
  std::size_t selected = 0;
  std::size_t selected_errors = 0;
  std::size_t n = 0;
};
SelectionStats selection_stats(const Dataset& data, const Classifier& c, const Halfspace& h);

}  // namespace selectorlab

#endif
