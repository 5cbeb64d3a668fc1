#ifndef SELECTORLAB_SELECTOR_HPP
#define SELECTORLAB_SELECTOR_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "selectorlab/core.hpp"
#include "selectorlab/listlearn.hpp"
#include "selectorlab/source.hpp"

namespace selectorlab {

struct Schedule {
  std::size_t T;
  std::size_t N;
  std::size_t holdout_n;
};

/// T = ceil((4d + ln(8k/delta)) / eps^4)
/// N = ceil(1600 ln^2(16 T k / delta) / eps^2)
/// holdout_n = ceil(ln(4 k T / delta) / (2 eps))
/// where k is the number of classifiers.
Schedule schedule(double epsilon, double delta, std::size_t d, std::size_t class_size);

/// Upper bound on examples drawn by ccfc: 2 T N per classifier plus the holdout.
double schedule_cost(const Schedule& s, std::size_t class_size);

struct CcfcConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  /// Replaces the theoretical schedule when set.
  std::optional<Schedule> override_schedule;
  /// Start direction; e_1 when unset. Both +w0 and -w0 are run.
  std::optional<UnitVector> w0;

  Schedule resolve(std::size_t d, std::size_t class_size) const;
  UnitVector start(std::size_t d) const;
  void validate() const;
};

struct PairResult {
  std::size_t classifier_index = 0;
  Classifier classifier = Classifier::constant(false);
  Halfspace selector = Halfspace::homogeneous(UnitVector::basis(1, 0));
  double joint_error_estimate = 0.0;
  /// NaN when the selector holds no holdout point.
  double conditional_error_estimate = 0.0;
  std::size_t examples_used = 0;
  bool reused_examples = false;
  /// Which run produced the selector: +1 or -1 start, 0-based iterate index.
  int start_sign = 1;
  std::size_t iterate_index = 0;
  Schedule schedule{};
  /// Best holdout joint error reached for each classifier, in list order.
  std::vector<double> per_classifier_error;
};

/// Draws the holdout from the source, then runs ccfc_on_holdout.
PairResult ccfc(const ExampleSource& source, const std::vector<Classifier>& classifiers,
                const CcfcConfig& cfg, const Rng& rng);

/// For each classifier, runs PSGD on its error distribution from +w0 and -w0,
/// keeps the iterate of least joint error on the shared holdout, and returns
/// the overall minimizer. Earlier classifiers win ties.
PairResult ccfc_on_holdout(const ExampleSource& source, const std::vector<Classifier>& classifiers,
                           const Dataset& holdout, const CcfcConfig& cfg, const Rng& rng);

struct CcslcResult {
  SparseList list;
  PairResult pair;
};

/// Learns a sparse-linear list from list_cfg.m fresh examples, then runs ccfc
/// over it.
CcslcResult ccslc(const ExampleSource& source, const SparseListConfig& list_cfg,
                  const CcfcConfig& cfg, const Rng& rng);

nlohmann::json pair_result_to_json(const PairResult& r, std::uint64_t seed);

}  // namespace selectorlab

#endif
