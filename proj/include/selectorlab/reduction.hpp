#ifndef SELECTORLAB_REDUCTION_HPP
#define SELECTORLAB_REDUCTION_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "selectorlab/core.hpp"

namespace selectorlab {

class ZeroMassCondition : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Atom {
  Vector point;
  std::uint8_t y;
  double mass;
};

/// Finitely supported distribution on R^d x {0,1}. Masses sum to one and
/// (point, y) pairs are distinct.
class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double label_mass(bool y) const;

 private:
  std::vector<Atom> atoms_;
};

/// A subset of R^d given by its membership predicate.
class Hypothesis {
 public:
  using Predicate = std::function<bool(const ConstVec&)>;
  Hypothesis(std::string name, Predicate contains);

  static Hypothesis everything();
  static Hypothesis nothing();
  static Hypothesis halfspace(const Halfspace& h);

  bool contains(const ConstVec& x) const { return contains_(x); }
  const std::string& name() const { return name_; }
  Hypothesis complement() const;

 private:
  std::string name_;
  Predicate contains_;
};

class HypothesisFamily {
 public:
  HypothesisFamily(std::vector<Hypothesis> members, bool closed_under_complement);

  /// {x[axis] >= t} and {x[axis] < t} for every cut, interleaved in cut order.
  static HypothesisFamily thresholds(const std::vector<double>& cuts, std::size_t axis = 0);

  const std::vector<Hypothesis>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  const Hypothesis& operator[](std::size_t i) const { return members_[i]; }
  bool closed_under_complement() const { return closed_; }

  /// Extensional check on the atoms of `dist`: every member's complement
  /// agrees with some member on every atom.
  bool verify_complement_closure(const FiniteDistribution& dist) const;

 private:
  std::vector<Hypothesis> members_;
  bool closed_;
};

/// P[x in S].
double mass(const FiniteDistribution& dist, const Hypothesis& s);

/// P[y = 1[x in S]]: agreement counts as loss.
double err_class(const FiniteDistribution& dist, const Hypothesis& s);

/// P[y = 1[x in S] | x in T]; throws ZeroMassCondition when P[x in T] = 0.
double err_cond(const FiniteDistribution& dist, const Hypothesis& s, const Hypothesis& t);

/// err_class(S) next to its two conditional-loss rewritings. A form is
/// absent when the set it conditions on has zero mass.
struct Decomposition {
  double lhs;
  std::optional<double> via_inside;   // 2 err(S|S) P[S] + P[y=0] - P[S]
  std::optional<double> via_outside;  // 2 err(S|~S) P[~S] + P[y=1] - P[~S]
};
Decomposition check_decomposition(const FiniteDistribution& dist, const Hypothesis& s);

FiniteDistribution flip_labels(const FiniteDistribution& dist);

// -- reductions ----------------------------------------------------------------

struct LearnerRequest {
  double epsilon;
  double alpha;
  double delta;
  double a;
  double b;
  const FiniteDistribution& dist;
  const HypothesisFamily& family;
};

/// Conditional learner restricted to the population band [a, b]. Returns
/// nullopt when no member of the family falls in the band.
using ConditionalLearner = std::function<std::optional<Hypothesis>(const LearnerRequest&)>;

struct Band {
  std::size_t k;
  double a;
  double b;
};

/// [(k-1) eps, k eps] for k = 1..ceil(1/eps); the last band reaches 1.
std::vector<Band> population_bands(double epsilon);

struct BandRecord {
  std::size_t k;
  double a;
  double b;
  std::string path;    // "direct" or "flipped"
  std::string status;  // "ok", "infeasible" or "failed"
  std::optional<double> candidate_err;
};

struct ReductionOptions {
  /// Exact evaluation on the finite distribution; otherwise the final argmin
  /// uses an estimation sample drawn from it.
  bool exact = true;
  std::uint64_t seed = 0;
};

struct ReductionResult {
  Hypothesis chosen;
  double err;  // err_class of `chosen` as used for selection
  std::vector<BandRecord> audit;
  std::size_t estimation_n = 0;
};

/// ceil(ln(4 ceil(1/eps) / delta) / (2 eps^2)).
std::size_t estimation_sample_size(double epsilon, double delta);

ReductionResult reduce_additive(const ConditionalLearner& learner, const HypothesisFamily& family,
                                const FiniteDistribution& dist, double epsilon, double delta,
                                const ReductionOptions& opts = {});

ReductionResult reduce_multiplicative(const ConditionalLearner& learner,
                                      const HypothesisFamily& family,
                                      const FiniteDistribution& dist, double alpha,
                                      double epsilon, double delta,
                                      const ReductionOptions& opts = {});

/// One JSON object per line: {k, a, b, path, learner_status, candidate_err}.
void write_audit_jsonl(std::ostream& os, const std::vector<BandRecord>& audit);

// -- random instances ------------------------------------------------------------

struct LineInstance {
  FiniteDistribution dist;
  HypothesisFamily family;
};

/// Random distribution with `atoms` atoms on the real line (d = 1) and a
/// threshold family built from `cuts` cut points (2 * cuts members).
LineInstance random_line_instance(Rng& rng, std::size_t atoms, std::size_t cuts);

/// Random distribution with `atoms` atoms in R^d, uniform random labels.
FiniteDistribution random_finite_distribution(Rng& rng, std::size_t atoms, std::size_t d);

}  // namespace selectorlab

#endif
