#ifndef SELECTORLAB_CLI_HPP
#define SELECTORLAB_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace selectorlab {

/// Exit codes: 0 success, 1 failed check or learner error, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Error-vs-epsilon experiment. For each (eps, seed) a planted model with
/// joint optimum eps (p_in = 2 eps, p_out = 0.5) is run through ccfc with the
/// scaled schedule T = ceil(t_scale/eps), N = ceil(n_scale/eps),
/// holdout = ceil(holdout_scale/eps).
struct SweepConfig {
  std::vector<double> eps;
  std::vector<std::uint64_t> seeds;
  std::size_t d = 5;
  double t_scale = 50.0;
  double n_scale = 20.0;
  double holdout_scale = 200.0;
  double budget = 1e9;
  bool force = false;

  void validate() const;
};

nlohmann::json sweep_config_to_json(const SweepConfig& c);
SweepConfig sweep_config_from_json(const nlohmann::json& j);

struct SweepRow {
  double eps;
  std::uint64_t seed;
  double true_joint_error;
  double angle_to_v;
  std::size_t examples_used;
};

std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

/// Columns eps,seed,true_joint_error,angle_to_v,examples_used. After the
/// seed rows of each eps comes one row with seed "median".
void write_sweep_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<SweepRow>& rows);

/// Least-squares slope of log(median error) against log(eps).
double fit_exponent(const SweepConfig& cfg, const std::vector<SweepRow>& rows);

/// Parses "a..b" (inclusive) or a comma list.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace selectorlab

#endif
