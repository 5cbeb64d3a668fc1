#include "selectorlab/selector.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "selectorlab/io.hpp"
#include "selectorlab/parallel.hpp"
#include "selectorlab/psgd.hpp"

namespace selectorlab {

namespace {

std::size_t ceil_count(double v, const char* what) {
  if (!std::isfinite(v) || v > 1e18) throw std::overflow_error(std::string("schedule: ") + what + " overflows");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v)));
}

struct RunOutcome {
  BestIterate best;
  std::size_t examples = 0;
  bool reused = false;
};

}  // namespace

Schedule schedule(double epsilon, double delta, std::size_t d, std::size_t class_size) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("schedule: epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("schedule: delta must lie in (0, 1)");
  if (d < 1 || class_size < 1) throw std::invalid_argument("schedule: d and class size must be >= 1");
  const double k = static_cast<double>(class_size);
  const double T = ceil_count((4.0 * static_cast<double>(d) + std::log(8.0 * k / delta)) / std::pow(epsilon, 4), "T");
  const double l = std::log(16.0 * T * k / delta);
  const std::size_t N = ceil_count(1600.0 * l * l / (epsilon * epsilon), "N");
  const std::size_t h = ceil_count(std::log(4.0 * k * T / delta) / (2.0 * epsilon), "holdout");
  return {static_cast<std::size_t>(T), N, h};
}

double schedule_cost(const Schedule& s, std::size_t class_size) {
  return 2.0 * static_cast<double>(s.T) * static_cast<double>(s.N) * static_cast<double>(class_size) +
         static_cast<double>(s.holdout_n);
}

Schedule CcfcConfig::resolve(std::size_t d, std::size_t class_size) const {
  if (override_schedule) {
    const auto& s = *override_schedule;
    if (s.T < 1 || s.N < 1 || s.holdout_n < 1)
      throw std::invalid_argument("CcfcConfig: override schedule entries must be >= 1");
    return s;
  }
  return schedule(epsilon, delta, d, class_size);
}

UnitVector CcfcConfig::start(std::size_t d) const {
  if (!w0) return UnitVector::basis(d, 0);
  require_same_dim(w0->dim(), d, "CcfcConfig start");
  return *w0;
}

void CcfcConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("CcfcConfig: epsilon must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("CcfcConfig: delta must lie in (0, 1)");
}

PairResult ccfc(const ExampleSource& source, const std::vector<Classifier>& classifiers,
                const CcfcConfig& cfg, const Rng& rng) {
  cfg.validate();
  if (classifiers.empty()) throw std::invalid_argument("ccfc: empty classifier list");
  const Schedule sched = cfg.resolve(source.dim(), classifiers.size());
  auto stream = source.open(rng.child("holdout"));
  const Dataset holdout = stream->next(sched.holdout_n);
  PairResult r = ccfc_on_holdout(source, classifiers, holdout, cfg, rng);
  r.examples_used += holdout.size();
  r.reused_examples = r.reused_examples || stream->reused_examples();
  return r;
}

PairResult ccfc_on_holdout(const ExampleSource& source, const std::vector<Classifier>& classifiers,
                           const Dataset& holdout, const CcfcConfig& cfg, const Rng& rng) {
  cfg.validate();
  if (classifiers.empty()) throw std::invalid_argument("ccfc: empty classifier list");
  if (holdout.empty()) throw EmptyDataset("ccfc: empty holdout");
  const std::size_t d = source.dim();
  require_same_dim(holdout.dim(), d, "ccfc holdout");
  const Schedule sched = cfg.resolve(d, classifiers.size());
  const UnitVector w0 = cfg.start(d);

  // Run 2k + 0 starts at +w0, run 2k + 1 at -w0.
  std::vector<std::optional<RunOutcome>> slots(2 * classifiers.size());
  const Rng run_root = rng.child("runs");
  parallel_for(slots.size(), [&](std::size_t r) {
    const Classifier& c = classifiers[r / 2];
    ClassifierErrorSampler sampler(source.open(run_root.child(static_cast<std::uint64_t>(r))), c, d);
    const PsgdConfig pc = PsgdConfig::standard(sched.T, sched.N, r % 2 == 0 ? w0 : -w0);
    const PsgdTrace trace = psgd(sampler, pc);
    slots[r] = RunOutcome{best_iterate(trace, holdout, c), trace.examples_used, trace.reused_examples};
  });

  std::vector<RunOutcome> runs;
  runs.reserve(slots.size());
  for (auto& s : slots) runs.push_back(std::move(*s));

  PairResult out;
  out.schedule = sched;
  double best_err = std::numeric_limits<double>::infinity();
  std::size_t best_run = 0;
  for (std::size_t k = 0; k < classifiers.size(); ++k) {
    const auto& plus = runs[2 * k];
    const auto& minus = runs[2 * k + 1];
    const std::size_t pick = minus.best.joint_error < plus.best.joint_error ? 2 * k + 1 : 2 * k;
    out.per_classifier_error.push_back(runs[pick].best.joint_error);
    if (runs[pick].best.joint_error < best_err) {
      best_err = runs[pick].best.joint_error;
      best_run = pick;
    }
  }
  for (const auto& r : runs) {
    out.examples_used += r.examples;
    out.reused_examples = out.reused_examples || r.reused;
  }

  const RunOutcome& win = runs[best_run];
  out.classifier_index = best_run / 2;
  out.classifier = classifiers[out.classifier_index];
  out.selector = Halfspace::homogeneous(win.best.w);
  out.joint_error_estimate = win.best.joint_error;
  out.start_sign = best_run % 2 == 0 ? 1 : -1;
  out.iterate_index = win.best.index;
  try {
    out.conditional_error_estimate = conditional_error(holdout, out.classifier, out.selector);
  } catch (const EmptySelection&) {
    out.conditional_error_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

CcslcResult ccslc(const ExampleSource& source, const SparseListConfig& list_cfg,
                  const CcfcConfig& cfg, const Rng& rng) {
  if (list_cfg.m < 1) throw std::invalid_argument("ccslc: m must be >= 1");
  if (list_cfg.s < 1) throw std::invalid_argument("ccslc: sparsity must be >= 1");
  auto stream = source.open(rng.child("list"));
  const Dataset sample = stream->next(list_cfg.m);
  CcslcResult out{sparse_list(sample, list_cfg), PairResult{}};
  if (out.list.members.empty()) throw std::runtime_error("ccslc: sparse list is empty (degenerate sample)");
  const auto classifiers = to_classifiers(out.list);
  out.pair = ccfc(source, classifiers, cfg, rng.child("ccfc"));
  out.pair.examples_used += sample.size();
  return out;
}

nlohmann::json pair_result_to_json(const PairResult& r, std::uint64_t seed) {
  nlohmann::json cond = std::isnan(r.conditional_error_estimate)
                            ? nlohmann::json(nullptr)
                            : nlohmann::json(r.conditional_error_estimate);
  return {{"classifier_id", r.classifier_index},
          {"classifier", classifier_to_json(r.classifier)},
          {"w", vector_to_json(r.selector.w.vec())},
          {"joint_error_estimate", r.joint_error_estimate},
          {"conditional_error_estimate", cond},
          {"examples_used", r.examples_used},
          {"reused_examples", r.reused_examples},
          {"start_sign", r.start_sign},
          {"iterate_index", r.iterate_index},
          {"schedule", {{"T", r.schedule.T}, {"N", r.schedule.N}, {"holdout_n", r.schedule.holdout_n}}},
          {"seed", seed}};
}

}  // namespace selectorlab
