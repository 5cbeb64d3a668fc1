#include "selectorlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace selectorlab {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionMismatch(os.str());
  }
}

UnitVector::UnitVector(const Vector& v) {
  if (v.size() == 0) throw std::invalid_argument("UnitVector: empty vector");
  if (!v.allFinite()) throw std::invalid_argument("UnitVector: non-finite entry");
  const double norm = v.norm();
  if (norm == 0.0) throw std::invalid_argument("UnitVector: zero vector has no direction");
  v_ = v / norm;
}

UnitVector UnitVector::basis(std::size_t d, std::size_t axis) {
  if (axis >= d) throw std::out_of_range("UnitVector::basis: axis out of range");
  Vector e = Vector::Zero(static_cast<Eigen::Index>(d));
  e[static_cast<Eigen::Index>(axis)] = 1.0;
  return UnitVector(e);
}

UnitVector UnitVector::random(Rng& rng, std::size_t d) {
  Vector g(static_cast<Eigen::Index>(d));
  do {
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  } while (g.norm() == 0.0);
  return UnitVector(g);
}

UnitVector UnitVector::operator-() const { return UnitVector(-v_); }

// ---------------------------------------------------------------------------

Classifier Classifier::constant(bool label) { return Classifier(ConstantRule{label}); }

Classifier Classifier::linear(Vector w, double t) {
  if (w.size() == 0) throw std::invalid_argument("Classifier::linear: empty weight vector");
  return Classifier(LinearRule{std::move(w), t});
}

Classifier Classifier::sparse_linear(std::vector<std::size_t> support, std::vector<double> weights,
                                     double t) {
  if (support.size() != weights.size())
    throw std::invalid_argument("Classifier::sparse_linear: support/weights length differ");
  for (std::size_t j = 1; j < support.size(); ++j)
    if (support[j] <= support[j - 1])
      throw std::invalid_argument("Classifier::sparse_linear: support must be strictly increasing");
  return Classifier(SparseLinearRule{std::move(support), std::move(weights), t});
}

Classifier Classifier::table(std::map<std::vector<double>, bool> entries, bool fallback) {
  return Classifier(TableRule{std::move(entries), fallback});
}

Classifier Classifier::negation(const Classifier& inner) {
  return Classifier(NegatedRule{std::make_shared<const Classifier>(inner)});
}

bool Classifier::predict(const ConstVec& x) const {
  struct Visitor {
    const ConstVec& x;
    bool operator()(const ConstantRule& r) const { return r.label; }
    bool operator()(const LinearRule& r) const {
      require_same_dim(static_cast<std::size_t>(r.w.size()), static_cast<std::size_t>(x.size()),
                       "Classifier::predict");
      return r.w.dot(x) >= r.t;
    }
    bool operator()(const SparseLinearRule& r) const {
      double s = 0.0;
      for (std::size_t j = 0; j < r.support.size(); ++j) {
        if (r.support[j] >= static_cast<std::size_t>(x.size()))
          throw DimensionMismatch("Classifier::predict: support index beyond dimension");
        s += r.weights[j] * x[static_cast<Eigen::Index>(r.support[j])];
      }
      return s >= r.t;
    }
    bool operator()(const TableRule& r) const {
      std::vector<double> key(x.data(), x.data() + x.size());
      auto it = r.entries.find(key);
      return it == r.entries.end() ? r.fallback : it->second;
    }
    bool operator()(const NegatedRule& r) const { return !r.inner->predict(x); }
  };
  return std::visit(Visitor{x}, rule_);
}

std::string Classifier::describe() const {
  struct Visitor {
    std::string operator()(const ConstantRule& r) const {
      return r.label ? "constant(1)" : "constant(0)";
    }
    std::string operator()(const LinearRule& r) const {
      std::ostringstream os;
      os << "linear(d=" << r.w.size() << ", t=" << r.t << ")";
      return os.str();
    }
    std::string operator()(const SparseLinearRule& r) const {
      std::ostringstream os;
      os << "sparse(";
      for (std::size_t j = 0; j < r.support.size(); ++j) {
        if (j) os << ' ';
        os << r.support[j] << ':' << r.weights[j];
      }
      os << ", t=" << r.t << ")";
      return os.str();
    }
    std::string operator()(const TableRule& r) const {
      return "table(" + std::to_string(r.entries.size()) + ")";
    }
    std::string operator()(const NegatedRule& r) const { return "not(" + r.inner->describe() + ")"; }
  };
  return std::visit(Visitor{}, rule_);
}

// ---------------------------------------------------------------------------

Dataset::Dataset(Matrix features, std::vector<std::uint8_t> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size())
    throw DimensionMismatch("Dataset: feature rows and labels differ in count");
  if (features_.cols() < 1) throw std::invalid_argument("Dataset: dimension must be >= 1");
  for (auto y : labels_)
    if (y > 1) throw std::invalid_argument("Dataset: labels must be 0 or 1");
}

Dataset Dataset::head(std::size_t n) const {
  if (n > size()) throw std::out_of_range("Dataset::head: not enough examples");
  Matrix f = features_.topRows(static_cast<Eigen::Index>(n));
  return Dataset(std::move(f), std::vector<std::uint8_t>(labels_.begin(), labels_.begin() + n));
}

Dataset Dataset::with_labels(std::vector<std::uint8_t> labels) const {
  return Dataset(features_, std::move(labels));
}

// ---------------------------------------------------------------------------

void PlantedModel::validate() const {
  if (d < 1) throw std::invalid_argument("PlantedModel: d must be >= 1");
  require_same_dim(v.dim(), d, "PlantedModel");
  if (!(0.0 <= p_in && p_in <= p_out && p_out <= 1.0))
    throw std::invalid_argument("PlantedModel: require 0 <= p_in <= p_out <= 1");
}

Dataset sample_gaussian(Rng& rng, std::size_t d, std::size_t n) {
  if (d < 1 || n < 1) throw std::invalid_argument("sample_gaussian: d and n must be >= 1");
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  double* p = x.data();
  for (std::size_t k = 0; k < n * d; ++k) p[k] = rng.normal();
  return Dataset(std::move(x), std::vector<std::uint8_t>(n, 0));
}

Dataset sample_planted(const PlantedModel& model, std::size_t n) {
  Rng rng = Rng(model.seed).child("planted");
  return sample_planted(model, n, rng);
}

Dataset sample_planted(const PlantedModel& model, std::size_t n, Rng& rng) {
  model.validate();
  if (n < 1) throw std::invalid_argument("sample_planted: n must be >= 1");
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(model.d));
  std::vector<std::uint8_t> y(n);
  const Vector& v = model.v.vec();
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < row.size(); ++j) row[j] = rng.normal();
    const bool inside = row.dot(v.transpose()) >= 0.0;
    const bool flip = rng.bernoulli(inside ? model.p_in : model.p_out);
    const bool clean = model.c_star.predict(row.transpose());
    y[i] = static_cast<std::uint8_t>(clean != flip);
  }
  return Dataset(std::move(x), std::move(y));
}

Vector project_orthogonal(const ConstVec& x, const UnitVector& w) {
  require_same_dim(static_cast<std::size_t>(x.size()), w.dim(), "project_orthogonal");
  return x - x.dot(w.vec()) * w.vec();
}

double angle(const UnitVector& u, const UnitVector& w) {
  require_same_dim(u.dim(), w.dim(), "angle");
  return std::acos(std::clamp(u.vec().dot(w.vec()), -1.0, 1.0));
}

SelectionStats selection_stats(const Dataset& data, const Classifier& c, const Halfspace& h) {
  if (data.empty()) throw EmptyDataset("selection_stats: empty dataset");
  require_same_dim(data.dim(), h.w.dim(), "selection_stats");
  SelectionStats s;
  s.n = data.size();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto xi = data.x(i);
    if (!h.contains(xi)) continue;
    ++s.selected;
    if (c.predict(xi) != (data.y(i) != 0)) ++s.selected_errors;
  }
  return s;
}

double joint_error(const Dataset& data, const Classifier& c, const Halfspace& h) {
  const auto s = selection_stats(data, c, h);
  return static_cast<double>(s.selected_errors) / static_cast<double>(s.n);
}

double selection_rate(const Dataset& data, const Halfspace& h) {
  if (data.empty()) throw EmptyDataset("selection_rate: empty dataset");
  require_same_dim(data.dim(), h.w.dim(), "selection_rate");
  std::size_t k = 0;
  for (std::size_t i = 0; i < data.size(); ++i) k += h.contains(data.x(i)) ? 1 : 0;
  return static_cast<double>(k) / static_cast<double>(data.size());
}

double conditional_error(const Dataset& data, const Classifier& c, const Halfspace& h) {
  const auto s = selection_stats(data, c, h);
  if (s.selected == 0) throw EmptySelection("conditional_error: selector contains no example");
  return static_cast<double>(s.selected_errors) / static_cast<double>(s.selected);
}

}  // namespace selectorlab
