#ifndef SELECTORLAB_ORACLE_HPP
#define SELECTORLAB_ORACLE_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "selectorlab/core.hpp"
#include "selectorlab/reduction.hpp"

namespace selectorlab {

struct GridSpec {
  std::size_t d = 2;
  std::size_t resolution = 3600;
  std::vector<double> thresholds{0.0};

  void validate() const;
};

/// d = 2: uniform angles 2 pi k / resolution. d = 3: Fibonacci sphere.
std::vector<UnitVector> grid_directions(const GridSpec& spec);

struct GridRow {
  std::size_t direction_index;
  double theta;  // azimuth for d = 2, polar angle for d = 3
  double threshold;
  double joint_error;
};

struct GridResult {
  Halfspace best;
  double joint_error;
  std::size_t direction_index;
  std::vector<GridRow> rows;  // filled only when requested
};

/// Exhaustive minimization of empirical joint error over directions x
/// thresholds. Lowest (direction, threshold) index wins ties.
GridResult grid_best_halfspace(const Dataset& data, const Classifier& c, const GridSpec& spec,
                               bool keep_rows = false);

/// Columns direction_index,theta,threshold,joint_error.
void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows);

class InfeasibleBand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SubsetChoice {
  std::size_t index;
  double err;
};

/// Without a band: argmin of err_class over the family. With band [a, b]:
/// argmin of err_cond(S, S) over members of positive mass inside the band.
/// Lowest member index wins ties.
SubsetChoice exhaustive_best_subset(const FiniteDistribution& dist, const HypothesisFamily& family,
                                    std::optional<std::pair<double, double>> band);

/// Exact band-restricted conditional learner backed by exhaustive_best_subset.
ConditionalLearner exhaustive_learner();

/// Closed form for the planted model:
/// p_in (pi - theta) / (2 pi) + p_out theta / (2 pi), theta = angle(v, w).
double planted_joint_error(const PlantedModel& model, const UnitVector& w);

}  // namespace selectorlab

#endif
