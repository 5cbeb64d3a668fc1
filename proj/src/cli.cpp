#include "selectorlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "selectorlab/io.hpp"
#include "selectorlab/listlearn.hpp"
#include "selectorlab/oracle.hpp"
#include "selectorlab/parallel.hpp"
#include "selectorlab/psgd.hpp"
#include "selectorlab/reduction.hpp"
#include "selectorlab/selector.hpp"
#include "selectorlab/source.hpp"
#include "selectorlab/verify.hpp"

namespace selectorlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json versions() {
  return {{"selectorlab", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"cli11", CLI11_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

struct Common {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Root seed for all randomness")->capture_default_str();
  sub->add_option("--out-dir", c.out_dir, "Directory for artifacts")->capture_default_str();
}

std::string artifact(const Common& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

void write_manifest(const Common& c, const std::string& command, const json& config, double seconds) {
  save_json(artifact(c, "manifest.json"), {{"command", command},
                                           {"config", config},
                                           {"seed", c.seed},
                                           {"versions", versions()},
                                           {"wall_time", seconds}});
}

// -- data sources ----------------------------------------------------------------

struct SourceOpts {
  std::string model;
  std::string data;
};

void add_source(CLI::App* sub, SourceOpts& s) {
  auto* m = sub->add_option("--model", s.model, "Planted model JSON (from gen)");
  auto* d = sub->add_option("--data", s.data, "Dataset CSV with header x_1..x_d,y");
  m->excludes(d);
  d->excludes(m);
}

json source_json(const SourceOpts& s) {
  return s.model.empty() ? json{{"data", s.data}} : json{{"model", s.model}};
}

std::optional<PlantedModel> load_model(const SourceOpts& s) {
  if (s.model.empty()) return std::nullopt;
  return planted_model_from_json(load_json(s.model));
}

std::unique_ptr<ExampleSource> open_source(const SourceOpts& s) {
  if (!s.model.empty()) return std::make_unique<PlantedSource>(*load_model(s));
  if (!s.data.empty()) return std::make_unique<FiniteSource>(load_dataset_csv(s.data));
  throw UsageError("one of --model or --data is required");
}

std::optional<UnitVector> parse_direction(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return UnitVector(x);
}

Classifier default_c_star(std::size_t d) { return Classifier::linear(UnitVector::basis(d, d - 1).vec(), 0.0); }

// -- budget guard ------------------------------------------------------------------

struct ScheduleOpts {
  std::string mode = "override";
  double eps = 0.1;
  double delta = 0.1;
  std::size_t T = 0;
  std::size_t N = 0;
  std::size_t holdout_n = 0;
  std::vector<double> w0;
  double budget = 1e9;
  bool force = false;
};

void add_schedule(CLI::App* sub, ScheduleOpts& s) {
  sub->add_option("--schedule", s.mode, "theoretical or override")
      ->check(CLI::IsMember({"theoretical", "override"}))
      ->capture_default_str();
  sub->add_option("--eps", s.eps, "Target epsilon")->capture_default_str();
  sub->add_option("--delta", s.delta, "Failure probability")->capture_default_str();
  sub->add_option("--T", s.T, "Iterations (override schedule)");
  sub->add_option("--N", s.N, "Batch size (override schedule)");
  sub->add_option("--holdout-n", s.holdout_n, "Holdout size (override schedule)");
  sub->add_option("--w0", s.w0, "Start direction")->delimiter(',');
  sub->add_option("--budget", s.budget, "Refuse theoretical runs drawing more examples")->capture_default_str();
  sub->add_flag("--force", s.force, "Ignore the example budget");
}

CcfcConfig ccfc_config(const ScheduleOpts& s) {
  CcfcConfig cfg;
  cfg.epsilon = s.eps;
  cfg.delta = s.delta;
  cfg.w0 = parse_direction(s.w0);
  if (s.mode == "override") {
    if (s.T == 0 || s.N == 0 || s.holdout_n == 0)
      throw UsageError("override schedule needs --T, --N and --holdout-n");
    cfg.override_schedule = Schedule{s.T, s.N, s.holdout_n};
  }
  return cfg;
}

void guard_budget(const ScheduleOpts& s, const CcfcConfig& cfg, std::size_t d, std::size_t class_size) {
  if (s.force) return;
  const Schedule sched = cfg.resolve(d, class_size);
  const double cost = schedule_cost(sched, class_size);
  if (cost > s.budget) {
    std::ostringstream msg;
    msg << "schedule would draw " << cost << " examples (T=" << sched.T << ", N=" << sched.N
        << ", holdout=" << sched.holdout_n << "), above --budget " << s.budget << "; pass --force to run";
    throw UsageError(msg.str());
  }
}

json schedule_json(const ScheduleOpts& s) {
  return {{"schedule", s.mode}, {"eps", s.eps},     {"delta", s.delta},   {"T", s.T},
          {"N", s.N},           {"holdout_n", s.holdout_n}, {"w0", s.w0}, {"budget", s.budget},
          {"force", s.force}};
}

// -- subcommands ---------------------------------------------------------------------

struct GenOpts {
  Common common;
  std::size_t d = 2;
  double p_in = 0.02;
  double p_out = 0.5;
  std::size_t n = 1000;
  std::vector<double> v;
  std::string classifier;
};

json run_gen(const GenOpts& o) {
  const auto v = parse_direction(o.v);
  if (v && v->dim() != o.d) throw UsageError("--v must have d entries");
  const Classifier c = o.classifier.empty() ? default_c_star(o.d) : classifier_from_json(load_json(o.classifier));
  const PlantedModel model{o.d, v ? *v : UnitVector::basis(o.d, 0), c, o.p_in, o.p_out, o.common.seed};
  model.validate();
  save_dataset_csv(artifact(o.common, "data.csv"), sample_planted(model, o.n));
  save_json(artifact(o.common, "model.json"), planted_model_to_json(model));
  return {{"d", o.d}, {"p_in", o.p_in}, {"p_out", o.p_out}, {"n", o.n}, {"v", o.v}, {"classifier", o.classifier}};
}

struct PsgdOpts {
  Common common;
  SourceOpts source;
  std::string classifier;
  std::size_t T = 100;
  std::size_t N = 100;
  std::optional<double> beta;
  std::vector<double> w0;
  std::optional<double> early_stop_eps;
  std::size_t holdout_n = 0;
};

Classifier resolve_classifier(const std::string& path, const SourceOpts& s) {
  if (!path.empty()) return classifier_from_json(load_json(path));
  if (auto m = load_model(s)) return m->c_star;
  throw UsageError("--classifier is required with --data");
}

json run_psgd(const PsgdOpts& o) {
  const auto source = open_source(o.source);
  const Classifier c = resolve_classifier(o.classifier, o.source);
  const std::size_t d = source->dim();
  const auto w0 = parse_direction(o.w0);
  PsgdConfig cfg = PsgdConfig::standard(o.T, o.N, w0 ? *w0 : UnitVector::basis(d, 0));
  if (o.beta) cfg.override_beta(*o.beta);
  cfg.early_stop_epsilon = o.early_stop_eps;

  const Rng rng(o.common.seed);
  ClassifierErrorSampler sampler(source->open(rng.child("train")), c, d);
  const PsgdTrace trace = psgd(sampler, cfg);
  {
    std::ofstream os(artifact(o.common, "trace.csv"), std::ios::binary);
    write_trace_csv(os, trace);
  }
  json result{{"iterations", trace.size()},
              {"examples_used", trace.examples_used},
              {"reused_examples", trace.reused_examples},
              {"stopped_early", trace.stopped_early},
              {"beta", cfg.beta},
              {"final_w", vector_to_json(trace.iterates.back().vec())}};
  if (o.holdout_n > 0) {
    const Dataset holdout = source->open(rng.child("holdout"))->next(o.holdout_n);
    const BestIterate best = best_iterate(trace, holdout, c);
    result["best"] = {{"w", vector_to_json(best.w.vec())}, {"index", best.index}, {"joint_error", best.joint_error}};
  }
  save_json(artifact(o.common, "result.json"), result);
  return {{"source", source_json(o.source)}, {"classifier", o.classifier}, {"T", o.T}, {"N", o.N},
          {"beta", o.beta ? json(*o.beta) : json(nullptr)}, {"w0", o.w0},
          {"early_stop_eps", o.early_stop_eps ? json(*o.early_stop_eps) : json(nullptr)},
          {"holdout_n", o.holdout_n}};
}

struct CcfcOpts {
  Common common;
  SourceOpts source;
  std::string classifiers;
  ScheduleOpts schedule;
};

std::vector<Classifier> resolve_classifiers(const std::string& path, const SourceOpts& s) {
  if (!path.empty()) {
    const json j = load_json(path);
    if (!j.is_array()) throw UsageError("--classifiers must hold a JSON array");
    std::vector<Classifier> out;
    for (const auto& e : j) out.push_back(classifier_from_json(e));
    return out;
  }
  if (auto m = load_model(s))
    return {m->c_star, Classifier::negation(m->c_star), Classifier::constant(true)};
  throw UsageError("--classifiers is required with --data");
}

json run_ccfc(const CcfcOpts& o) {
  const auto source = open_source(o.source);
  const auto classifiers = resolve_classifiers(o.classifiers, o.source);
  const CcfcConfig cfg = ccfc_config(o.schedule);
  guard_budget(o.schedule, cfg, source->dim(), classifiers.size());
  const PairResult r = ccfc(*source, classifiers, cfg, Rng(o.common.seed));
  json result = pair_result_to_json(r, o.common.seed);
  if (auto m = load_model(o.source)) result["angle_to_v"] = angle(m->v, r.selector.w);
  save_json(artifact(o.common, "result.json"), result);
  return {{"source", source_json(o.source)}, {"classifiers", o.classifiers}, {"schedule", schedule_json(o.schedule)}};
}

struct CcslcOpts {
  Common common;
  SourceOpts source;
  std::size_t s = 1;
  std::size_t m = 0;
  double nu = 1e-3;
  ScheduleOpts schedule;
};

json run_ccslc(const CcslcOpts& o) {
  if (o.m == 0) throw UsageError("--m must be >= 1");
  const auto source = open_source(o.source);
  SparseListConfig lc;
  lc.s = o.s;
  lc.m = o.m;
  lc.nu = o.nu;
  const CcfcConfig cfg = ccfc_config(o.schedule);
  const std::size_t max_list = enumerated_systems(source->dim(), o.m, o.s);
  guard_budget(o.schedule, cfg, source->dim(), std::max<std::size_t>(1, max_list));
  const CcslcResult r = ccslc(*source, lc, cfg, Rng(o.common.seed));
  {
    std::ofstream os(artifact(o.common, "list.jsonl"), std::ios::binary);
    write_list_jsonl(os, r.list);
  }
  json result = pair_result_to_json(r.pair, o.common.seed);
  result["list_size"] = r.list.size();
  save_json(artifact(o.common, "result.json"), result);
  return {{"source", source_json(o.source)}, {"s", o.s}, {"m", o.m}, {"nu", o.nu},
          {"schedule", schedule_json(o.schedule)}};
}

struct ListOpts {
  Common common;
  SourceOpts source;
  std::size_t s = 1;
  std::size_t m = 0;
  double nu = 1e-3;
  bool no_dedup = false;
};

json run_list_learn(const ListOpts& o) {
  if (o.m == 0) throw UsageError("--m must be >= 1");
  Dataset data = o.source.data.empty() ? open_source(o.source)->open(Rng(o.common.seed).child("list"))->next(o.m)
                                       : load_dataset_csv(o.source.data);
  SparseListConfig lc;
  lc.s = o.s;
  lc.m = o.m;
  lc.nu = o.nu;
  lc.dedup = !o.no_dedup;
  const SparseList list = sparse_list(data, lc);
  {
    std::ofstream os(artifact(o.common, "list.jsonl"), std::ios::binary);
    write_list_jsonl(os, list);
  }
  save_json(artifact(o.common, "summary.json"), {{"size", list.size()},
                                                 {"systems_enumerated", list.systems_enumerated},
                                                 {"systems_solved", list.systems_solved},
                                                 {"duplicates_removed", list.duplicates_removed}});
  return {{"source", source_json(o.source)}, {"s", o.s}, {"m", o.m}, {"nu", o.nu}, {"dedup", !o.no_dedup}};
}

struct ReduceOpts {
  Common common;
  std::string mode;
  std::size_t atoms = 16;
  std::size_t cuts = 16;
  double eps = 0.05;
  double alpha = 0.5;
  double delta = 0.1;
  bool estimate = false;
};

json run_reduce(const ReduceOpts& o) {
  Rng rng = Rng(o.common.seed).child("instance");
  const LineInstance inst = random_line_instance(rng, o.atoms, o.cuts);
  const ReductionOptions ro{!o.estimate, o.common.seed};
  const auto learner = exhaustive_learner();
  const ReductionResult r =
      o.mode == "additive"
          ? reduce_additive(learner, inst.family, inst.dist, o.eps, o.delta, ro)
          : reduce_multiplicative(learner, inst.family, inst.dist, o.alpha, o.eps, o.delta, ro);
  {
    std::ofstream os(artifact(o.common, "audit.jsonl"), std::ios::binary);
    write_audit_jsonl(os, r.audit);
  }
  const double best = exhaustive_best_subset(inst.dist, inst.family, std::nullopt).err;
  const double bound = o.mode == "additive" ? best + 6.0 * o.eps : (1.0 + o.alpha) * (best + 4.0 * o.eps);
  const double err = err_class(inst.dist, r.chosen);
  save_json(artifact(o.common, "result.json"), {{"chosen", r.chosen.name()},
                                                {"err_class", err},
                                                {"selection_err", r.err},
                                                {"exhaustive_min", best},
                                                {"guarantee", bound},
                                                {"within_guarantee", err <= bound + 1e-12},
                                                {"estimation_n", r.estimation_n}});
  return {{"mode", o.mode}, {"atoms", o.atoms}, {"cuts", o.cuts}, {"eps", o.eps},
          {"alpha", o.alpha}, {"delta", o.delta}, {"estimate", o.estimate}};
}

struct OracleOpts {
  Common common;
  std::string mode;
  SourceOpts source;
  std::string classifier;
  std::size_t n = 50000;
  std::size_t resolution = 3600;
  std::vector<double> thresholds{0.0};
  std::size_t atoms = 16;
  std::size_t cuts = 16;
  std::vector<double> band;
};

json run_oracle(const OracleOpts& o) {
  if (o.mode == "grid") {
    const Dataset data = o.source.data.empty()
                             ? open_source(o.source)->open(Rng(o.common.seed).child("oracle"))->next(o.n)
                             : load_dataset_csv(o.source.data);
    const Classifier c = resolve_classifier(o.classifier, o.source);
    const GridSpec spec{data.dim(), o.resolution, o.thresholds};
    const GridResult g = grid_best_halfspace(data, c, spec, true);
    {
      std::ofstream os(artifact(o.common, "grid.csv"), std::ios::binary);
      write_grid_csv(os, g.rows);
    }
    save_json(artifact(o.common, "result.json"), {{"w", vector_to_json(g.best.w.vec())},
                                                  {"threshold", g.best.t},
                                                  {"direction_index", g.direction_index},
                                                  {"joint_error", g.joint_error}});
    return {{"mode", o.mode}, {"source", source_json(o.source)}, {"classifier", o.classifier},
            {"n", o.n}, {"resolution", o.resolution}, {"thresholds", o.thresholds}};
  }
  if (!o.band.empty() && o.band.size() != 2) throw UsageError("--band takes two values a,b");
  Rng rng = Rng(o.common.seed).child("instance");
  const LineInstance inst = random_line_instance(rng, o.atoms, o.cuts);
  std::optional<std::pair<double, double>> band;
  if (!o.band.empty()) band = std::make_pair(o.band[0], o.band[1]);
  const SubsetChoice s = exhaustive_best_subset(inst.dist, inst.family, band);
  save_json(artifact(o.common, "result.json"),
            {{"index", s.index}, {"subset", inst.family[s.index].name()}, {"err", s.err}, {"banded", band.has_value()}});
  return {{"mode", o.mode}, {"atoms", o.atoms}, {"cuts", o.cuts}, {"band", o.band}};
}

struct VerifyOpts {
  Common common;
  std::string suite = "default";
};

json run_verify(const VerifyOpts& o, std::ostream& out, bool& failed) {
  const auto reports = run_suite(o.suite, o.common.seed);
  json arr = json::array();
  for (const auto& r : reports) {
    arr.push_back(report_to_json(r));
    const char* tag = r.vacuous ? "VACUOUS" : r.passed ? "PASS" : r.warning_only ? "WARN" : "FAIL";
    out << tag << ' ' << r.name << " measured=" << format_double(r.measured)
        << " bound=" << format_double(r.bound) << " tol=" << format_double(r.tolerance) << '\n';
    failed = failed || r.failed();
  }
  save_json(artifact(o.common, "reports.json"), arr);
  return {{"suite", o.suite}};
}

struct SweepOpts {
  Common common;
  std::vector<double> eps;
  std::string seeds = "1..10";
  SweepConfig cfg;
};

json run_sweep_command(SweepOpts& o, std::ostream& err) {
  o.cfg.eps = o.eps;
  o.cfg.seeds = parse_seed_list(o.seeds);
  // The root seed shifts every per-cell seed so sweeps stay reproducible from --seed.
  for (auto& s : o.cfg.seeds) s += o.common.seed;
  o.cfg.validate();
  const auto rows = run_sweep(o.cfg);
  {
    std::ofstream os(artifact(o.common, "sweep.csv"), std::ios::binary);
    write_sweep_csv(os, o.cfg, rows);
  }
  json summary{{"cells", rows.size()}};
  if (o.cfg.eps.size() >= 2) {
    const double p = fit_exponent(o.cfg, rows);
    summary["fitted_exponent"] = p;
    err << "sweep: fitted exponent p = " << format_double(p) << " (rate O(sqrt(eps)) predicts about 0.5)\n";
  }
  save_json(artifact(o.common, "summary.json"), summary);
  return sweep_config_to_json(o.cfg);
}

}  // namespace

// -- sweep -----------------------------------------------------------------------------

void SweepConfig::validate() const {
  if (eps.empty()) throw std::invalid_argument("sweep: need at least one eps");
  for (double e : eps)
    if (!(e > 0.0 && e <= std::exp(-1.0))) throw std::invalid_argument("sweep: eps must lie in (0, 1/e]");
  if (seeds.empty()) throw std::invalid_argument("sweep: need at least one seed");
  if (d < 2) throw std::invalid_argument("sweep: d must be >= 2");
  if (!(t_scale > 0.0 && n_scale > 0.0 && holdout_scale > 0.0))
    throw std::invalid_argument("sweep: schedule scales must be positive");
  if (!force) {
    for (double e : eps) {
      const Schedule s{static_cast<std::size_t>(std::ceil(t_scale / e)), static_cast<std::size_t>(std::ceil(n_scale / e)),
                       static_cast<std::size_t>(std::ceil(holdout_scale / e))};
      if (schedule_cost(s, 2) > budget)
        throw std::invalid_argument("sweep: eps " + format_double(e) + " exceeds the example budget; pass --force");
    }
  }
}

json sweep_config_to_json(const SweepConfig& c) {
  return {{"eps", c.eps},         {"seeds", c.seeds},     {"d", c.d},
          {"t_scale", c.t_scale}, {"n_scale", c.n_scale}, {"holdout_scale", c.holdout_scale},
          {"budget", c.budget},   {"force", c.force}};
}

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig c;
  c.eps = j.at("eps").get<std::vector<double>>();
  c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.d = j.at("d").get<std::size_t>();
  c.t_scale = j.at("t_scale").get<double>();
  c.n_scale = j.at("n_scale").get<double>();
  c.holdout_scale = j.at("holdout_scale").get<double>();
  c.budget = j.at("budget").get<double>();
  c.force = j.at("force").get<bool>();
  return c;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::size_t cells = cfg.eps.size() * cfg.seeds.size();
  std::vector<std::optional<SweepRow>> out(cells);
  parallel_for(cells, [&](std::size_t i) {
    const double e = cfg.eps[i / cfg.seeds.size()];
    const std::uint64_t seed = cfg.seeds[i % cfg.seeds.size()];
    Rng rng = Rng(seed).child("sweep");
    Rng vr = rng.child("v");
    const UnitVector v = UnitVector::random(vr, cfg.d);
    const PlantedModel model{cfg.d, v, default_c_star(cfg.d), 2.0 * e, 0.5, seed};
    const PlantedSource source(model);
    CcfcConfig cc;
    cc.override_schedule = Schedule{static_cast<std::size_t>(std::ceil(cfg.t_scale / e)),
                                    static_cast<std::size_t>(std::ceil(cfg.n_scale / e)),
                                    static_cast<std::size_t>(std::ceil(cfg.holdout_scale / e))};
    const std::vector<Classifier> classes{model.c_star, Classifier::negation(model.c_star)};
    const PairResult r = ccfc(source, classes, cc, rng.child("ccfc"));
    // Under the negated classifier the error rates become 1 - p.
    PlantedModel truth = model;
    if (r.classifier_index == 1) {
      truth.p_in = 1.0 - model.p_in;
      truth.p_out = 1.0 - model.p_out;
    }
    out[i] = SweepRow{e, seed, planted_joint_error(truth, r.selector.w), angle(v, r.selector.w), r.examples_used};
  });
  std::vector<SweepRow> rows;
  for (auto& r : out) rows.push_back(*r);
  return rows;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<const SweepRow*> rows_for(const std::vector<SweepRow>& rows, double e) {
  std::vector<const SweepRow*> out;
  for (const auto& r : rows)
    if (r.eps == e) out.push_back(&r);
  return out;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
  os << "eps,seed,true_joint_error,angle_to_v,examples_used\n";
  for (double e : cfg.eps) {
    std::vector<double> errs, angles, used;
    for (const SweepRow* r : rows_for(rows, e)) {
      os << format_double(r->eps) << ',' << r->seed << ',' << format_double(r->true_joint_error) << ','
         << format_double(r->angle_to_v) << ',' << r->examples_used << '\n';
      errs.push_back(r->true_joint_error);
      angles.push_back(r->angle_to_v);
      used.push_back(static_cast<double>(r->examples_used));
    }
    if (errs.empty()) continue;
    os << format_double(e) << ",median," << format_double(median(errs)) << ',' << format_double(median(angles))
       << ',' << format_double(median(used)) << '\n';
  }
}

double fit_exponent(const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
  std::vector<double> xs, ys;
  for (double e : cfg.eps) {
    std::vector<double> errs;
    for (const SweepRow* r : rows_for(rows, e)) errs.push_back(r->true_joint_error);
    if (errs.empty()) continue;
    const double m = median(errs);
    if (!(m > 0.0)) continue;
    xs.push_back(std::log(e));
    ys.push_back(std::log(m));
  }
  if (xs.size() < 2) throw std::invalid_argument("fit_exponent: need two eps values with positive error");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_exponent: eps values must differ");
  return sxy / sxx;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto to_u64 = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad seed list '" + text + "'");
    return static_cast<std::uint64_t>(std::stoull(s));
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto a = to_u64(text.substr(0, dots));
    const auto b = to_u64(text.substr(dots + 2));
    if (b < a) throw std::invalid_argument("bad seed range '" + text + "'");
    for (auto s = a; s <= b; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_u64(item));
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

// -- entry point ------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional classification with homogeneous halfspace selectors"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "Sample a planted dataset");
  add_common(g, gen.common);
  g->add_option("--d", gen.d, "Dimension")->required();
  g->add_option("--p-in", gen.p_in, "Error rate inside the planted selector")->capture_default_str();
  g->add_option("--p-out", gen.p_out, "Error rate outside the planted selector")->capture_default_str();
  g->add_option("--n", gen.n, "Number of examples")->capture_default_str();
  g->add_option("--v", gen.v, "Planted selector normal (default e_1)")->delimiter(',');
  g->add_option("--classifier", gen.classifier, "Reference classifier JSON (default sign of x_d)");

  PsgdOpts ps;
  auto* p = app.add_subcommand("psgd", "Projected SGD on one classifier's error distribution");
  add_common(p, ps.common);
  add_source(p, ps.source);
  p->add_option("--classifier", ps.classifier, "Classifier JSON (default: the model's reference)");
  p->add_option("--T", ps.T, "Iterations")->capture_default_str();
  p->add_option("--N", ps.N, "Batch size")->capture_default_str();
  p->add_option("--beta", ps.beta, "Override the step size sqrt(1/(T d))");
  p->add_option("--w0", ps.w0, "Start direction")->delimiter(',');
  p->add_option("--early-stop-eps", ps.early_stop_eps, "Stop once the batch gradient certifies stationarity");
  p->add_option("--holdout-n", ps.holdout_n, "Pick the best iterate on a holdout of this size");

  CcfcOpts cf;
  auto* c = app.add_subcommand("ccfc", "Best classifier-selector pair over a finite class");
  add_common(c, cf.common);
  add_source(c, cf.source);
  c->add_option("--classifiers", cf.classifiers, "JSON array of classifiers");
  add_schedule(c, cf.schedule);

  CcslcOpts cs;
  auto* cl = app.add_subcommand("ccslc", "Sparse-linear list learning followed by ccfc");
  add_common(cl, cs.common);
  add_source(cl, cs.source);
  cl->add_option("--s", cs.s, "Sparsity")->capture_default_str();
  cl->add_option("--m", cs.m, "List-learning sample size")->required();
  cl->add_option("--nu", cs.nu, "Margin")->capture_default_str();
  add_schedule(cl, cs.schedule);

  ListOpts ls;
  auto* l = app.add_subcommand("list-learn", "Enumerate sparse linear classifiers");
  add_common(l, ls.common);
  add_source(l, ls.source);
  l->add_option("--s", ls.s, "Sparsity")->capture_default_str();
  l->add_option("--m", ls.m, "Number of examples used")->required();
  l->add_option("--nu", ls.nu, "Margin")->capture_default_str();
  l->add_flag("--no-dedup", ls.no_dedup, "Keep duplicate solutions");

  ReduceOpts rd;
  auto* r = app.add_subcommand("reduce", "Band-sweep reduction on a random finite instance");
  add_common(r, rd.common);
  r->add_option("mode", rd.mode, "additive or multiplicative")
      ->required()
      ->check(CLI::IsMember({"additive", "multiplicative"}));
  r->add_option("--atoms", rd.atoms, "Atoms in the instance")->capture_default_str();
  r->add_option("--cuts", rd.cuts, "Threshold cuts (family has twice as many members)")->capture_default_str();
  r->add_option("--eps", rd.eps, "Band width")->capture_default_str();
  r->add_option("--alpha", rd.alpha, "Multiplicative slack")->capture_default_str();
  r->add_option("--delta", rd.delta, "Failure probability")->capture_default_str();
  r->add_flag("--estimate", rd.estimate, "Select on an estimation sample instead of exact losses");

  OracleOpts orc;
  auto* o = app.add_subcommand("oracle", "Exhaustive reference solvers");
  add_common(o, orc.common);
  o->add_option("mode", orc.mode, "grid or exhaustive")->required()->check(CLI::IsMember({"grid", "exhaustive"}));
  add_source(o, orc.source);
  o->add_option("--classifier", orc.classifier, "Classifier JSON for grid mode");
  o->add_option("--n", orc.n, "Examples drawn from --model in grid mode")->capture_default_str();
  o->add_option("--resolution", orc.resolution, "Grid directions")->capture_default_str();
  o->add_option("--thresholds", orc.thresholds, "Grid thresholds")->delimiter(',');
  o->add_option("--atoms", orc.atoms, "Atoms (exhaustive mode)")->capture_default_str();
  o->add_option("--cuts", orc.cuts, "Threshold cuts (exhaustive mode)")->capture_default_str();
  o->add_option("--band", orc.band, "Population band a,b")->delimiter(',');

  VerifyOpts vf;
  auto* v = app.add_subcommand("verify", "Run the property-check suite");
  add_common(v, vf.common);
  v->add_option("--suite", vf.suite, "default or quick")->check(CLI::IsMember({"default", "quick"}))->capture_default_str();

  SweepOpts sw;
  auto* s = app.add_subcommand("sweep", "Error-versus-epsilon experiment");
  add_common(s, sw.common);
  s->add_option("--eps", sw.eps, "Comma-separated eps values")->required()->delimiter(',');
  s->add_option("--seeds", sw.seeds, "Seed range a..b or comma list")->capture_default_str();
  s->add_option("--d", sw.cfg.d, "Dimension")->capture_default_str();
  s->add_option("--t-scale", sw.cfg.t_scale, "T = ceil(t_scale / eps)")->capture_default_str();
  s->add_option("--n-scale", sw.cfg.n_scale, "N = ceil(n_scale / eps)")->capture_default_str();
  s->add_option("--holdout-scale", sw.cfg.holdout_scale, "holdout = ceil(holdout_scale / eps)")->capture_default_str();
  s->add_option("--budget", sw.cfg.budget, "Refuse cells drawing more examples")->capture_default_str();
  s->add_flag("--force", sw.cfg.force, "Ignore the example budget");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const Common* common = name == "gen"          ? &gen.common
                         : name == "psgd"       ? &ps.common
                         : name == "ccfc"       ? &cf.common
                         : name == "ccslc"      ? &cs.common
                         : name == "list-learn" ? &ls.common
                         : name == "reduce"     ? &rd.common
                         : name == "oracle"     ? &orc.common
                         : name == "verify"     ? &vf.common
                                                : &sw.common;
  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(common->out_dir);
    json config;
    bool failed = false;
    if (name == "gen") config = run_gen(gen);
    else if (name == "psgd") config = run_psgd(ps);
    else if (name == "ccfc") config = run_ccfc(cf);
    else if (name == "ccslc") config = run_ccslc(cs);
    else if (name == "list-learn") config = run_list_learn(ls);
    else if (name == "reduce") config = run_reduce(rd);
    else if (name == "oracle") config = run_oracle(orc);
    else if (name == "verify") config = run_verify(vf, out, failed);
    else config = run_sweep_command(sw, err);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(*common, name, config, secs);
    if (failed) {
      err << name << ": one or more checks failed\n";
      return 1;
    }
    out << name << ": wrote " << common->out_dir << '\n';
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << name << " failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace selectorlab
