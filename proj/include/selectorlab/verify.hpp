#ifndef SELECTORLAB_VERIFY_HPP
#define SELECTORLAB_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "selectorlab/core.hpp"

namespace selectorlab {

/// Outcome of one property check. passed <=> measured <= bound + tolerance,
/// except that a vacuous check (premise not met) always passes and a
/// warning_only check never counts as a failure.
struct CheckReport {
  std::string name;
  std::string statement;
  double measured = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool vacuous = false;
  bool warning_only = false;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;

  /// Failed and counts against the suite.
  bool failed() const { return !passed && !vacuous && !warning_only; }
};

nlohmann::json report_to_json(const CheckReport& r);

constexpr std::size_t kMinBoundSamples = 100000;

/// Mean of e * max(0, <x, w>) for a random unit w against 1/sqrt(2 pi).
/// Throws std::invalid_argument when n < kMinBoundSamples.
CheckReport check_loss_bound(std::size_t d, std::size_t n, std::uint64_t seed, bool e = true);

/// Two reports: |E g| against 1/sqrt(2 pi) and E|g|^2 against d/2.
std::vector<CheckReport> check_grad_bounds(std::size_t d, std::size_t n, std::uint64_t seed,
                                           bool e = true);

/// max over random unit pairs of |grad L(w) - grad L(v)| - 2 |w - v|, using a
/// shared sample with planted error labels. Pair 0 is v = w and pair 1 is
/// antipodal; the rest are uniform.
CheckReport check_smoothness(std::size_t d, std::size_t pairs, std::size_t n, std::uint64_t seed);

/// Run-average of squared population gradient norms along a PSGD run on a
/// constant-error Gaussian source, against sqrt(d / T). The population norm
/// is estimated on a fresh 1e5-point batch at every 10th iterate.
CheckReport check_psgd_convergence(std::size_t d, std::size_t T, std::size_t N, std::uint64_t seed,
                                   bool e = true, std::size_t population_n = 100000);

/// Same measurement averaged over `runs` independent runs.
CheckReport check_psgd_convergence_averaged(std::size_t d, std::size_t T, std::size_t N,
                                            std::uint64_t seed, std::size_t runs);

/// If |E g_w| < (2/5) eps sqrt(ln 1/eps) and angle(v, w) < pi/2 then the
/// planted joint error of w is below (5/2) (eps sqrt(ln 1/eps))^(1/2).
/// Vacuous when the premise fails. Violations at eps > 1e-3 are warnings.
CheckReport check_stationarity_certificate(const PlantedModel& model, const UnitVector& w,
                                           double epsilon, std::size_t n, std::uint64_t seed);

/// The certificate at `angles` directions evenly spaced in [0, pi] from
/// v = e_1 in the plane, on a planted model with p_in = 2 eps and
/// p_out = 0.5. All directions share one sample of size n.
std::vector<CheckReport> stationarity_sweep(double epsilon, std::size_t angles, std::size_t n,
                                            std::uint64_t seed);

/// Both error-decomposition forms against err_class on random finite
/// distributions (1..32 atoms) and random subsets.
CheckReport check_decomposition_suite(std::size_t trials, std::uint64_t seed);

/// "default" or "quick". Checks run concurrently; report order is fixed.
std::vector<CheckReport> run_suite(const std::string& suite, std::uint64_t seed);

}  // namespace selectorlab

#endif
