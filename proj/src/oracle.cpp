#include "selectorlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "selectorlab/io.hpp"

namespace selectorlab {

namespace {
constexpr double kBandTolerance = 1e-12;
}

void GridSpec::validate() const {
  if (d != 2 && d != 3) throw std::invalid_argument("GridSpec: only d = 2 or 3 is supported");
  if (resolution < 4) throw std::invalid_argument("GridSpec: resolution must be >= 4");
  if (thresholds.empty()) throw std::invalid_argument("GridSpec: need at least one threshold");
}

std::vector<UnitVector> grid_directions(const GridSpec& spec) {
  spec.validate();
  std::vector<UnitVector> dirs;
  dirs.reserve(spec.resolution);
  const double n = static_cast<double>(spec.resolution);
  for (std::size_t k = 0; k < spec.resolution; ++k) {
    const double kk = static_cast<double>(k);
    Vector w(static_cast<Eigen::Index>(spec.d));
    if (spec.d == 2) {
      const double phi = 2.0 * std::numbers::pi * kk / n;
      w << std::cos(phi), std::sin(phi);
    } else {
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      const double z = 1.0 - 2.0 * (kk + 0.5) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      w << r * std::cos(golden * kk), r * std::sin(golden * kk), z;
    }
    dirs.emplace_back(w);
  }
  return dirs;
}

GridResult grid_best_halfspace(const Dataset& data, const Classifier& c, const GridSpec& spec,
                               bool keep_rows) {
  spec.validate();
  if (data.empty()) throw EmptyDataset("grid_best_halfspace: empty dataset");
  require_same_dim(data.dim(), spec.d, "grid_best_halfspace");

  const ErrorDistribution dist(data, c);
  std::vector<Eigen::Index> wrong;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist.e(i)) wrong.push_back(static_cast<Eigen::Index>(i));
  Matrix errs(static_cast<Eigen::Index>(wrong.size()), static_cast<Eigen::Index>(spec.d));
  for (std::size_t k = 0; k < wrong.size(); ++k)
    errs.row(static_cast<Eigen::Index>(k)) = data.features().row(wrong[k]);

  const auto dirs = grid_directions(spec);
  const double n = static_cast<double>(data.size());
  std::size_t best_dir = 0, best_thr = 0;
  std::size_t best_count = static_cast<std::size_t>(-1);
  std::vector<GridRow> rows;
  if (keep_rows) rows.reserve(dirs.size() * spec.thresholds.size());
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const Vector m = errs * dirs[k].vec();
    const double theta = spec.d == 2 ? 2.0 * std::numbers::pi * static_cast<double>(k) /
                                           static_cast<double>(spec.resolution)
                                     : std::acos(std::clamp(dirs[k][2], -1.0, 1.0));
    for (std::size_t j = 0; j < spec.thresholds.size(); ++j) {
      const double t = spec.thresholds[j];
      const auto count = static_cast<std::size_t>(((m.array() - t) >= 0.0).count());
      if (count < best_count) {
        best_count = count;
        best_dir = k;
        best_thr = j;
      }
      if (keep_rows) rows.push_back({k, theta, t, static_cast<double>(count) / n});
    }
  }
  return {Halfspace{dirs[best_dir], spec.thresholds[best_thr]},
          static_cast<double>(best_count) / n, best_dir, std::move(rows)};
}

void write_grid_csv(std::ostream& os, const std::vector<GridRow>& rows) {
  os << "direction_index,theta,threshold,joint_error\n";
  for (const auto& r : rows)
    os << r.direction_index << ',' << format_double(r.theta) << ',' << format_double(r.threshold)
       << ',' << format_double(r.joint_error) << '\n';
}

SubsetChoice exhaustive_best_subset(const FiniteDistribution& dist, const HypothesisFamily& family,
                                    std::optional<std::pair<double, double>> band) {
  std::optional<SubsetChoice> best;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const Hypothesis& s = family[i];
    double loss;
    if (band) {
      const double m = mass(dist, s);
      if (m <= 0.0 || m < band->first - kBandTolerance || m > band->second + kBandTolerance) continue;
      loss = err_cond(dist, s, s);
    } else {
      loss = err_class(dist, s);
    }
    if (!best || loss < best->err) best = SubsetChoice{i, loss};
  }
  if (!best) throw InfeasibleBand("exhaustive_best_subset: no family member lies in the band");
  return *best;
}

ConditionalLearner exhaustive_learner() {
  return [](const LearnerRequest& req) -> std::optional<Hypothesis> {
    try {
      const auto choice = exhaustive_best_subset(req.dist, req.family, std::make_pair(req.a, req.b));
      return req.family[choice.index];
    } catch (const InfeasibleBand&) {
      return std::nullopt;
    }
  };
}

double planted_joint_error(const PlantedModel& model, const UnitVector& w) {
  const double theta = angle(model.v, w);
  const double two_pi = 2.0 * std::numbers::pi;
  return model.p_in * (std::numbers::pi - theta) / two_pi + model.p_out * theta / two_pi;
}

}  // namespace selectorlab
