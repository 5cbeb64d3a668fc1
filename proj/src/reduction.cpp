#include "selectorlab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "selectorlab/io.hpp"

namespace selectorlab {

namespace {

constexpr double kMassTolerance = 1e-12;

double mass_where(const FiniteDistribution& dist, const std::function<bool(const Atom&)>& pred) {
  double m = 0.0;
  for (const auto& atom : dist.atoms())
    if (pred(atom)) m += atom.mass;
  return m;
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("FiniteDistribution: no atoms");
  const auto d = atoms_.front().point.size();
  double total = 0.0;
  std::set<std::pair<std::vector<double>, int>> seen;
  for (const auto& a : atoms_) {
    if (a.point.size() != d) throw DimensionMismatch("FiniteDistribution: mixed dimensions");
    if (a.y > 1) throw std::invalid_argument("FiniteDistribution: labels must be 0 or 1");
    if (!(a.mass >= 0.0)) throw std::invalid_argument("FiniteDistribution: negative mass");
    total += a.mass;
    std::vector<double> key(a.point.data(), a.point.data() + a.point.size());
    if (!seen.emplace(std::move(key), a.y).second)
      throw std::invalid_argument("FiniteDistribution: duplicate (point, y) atom");
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw std::invalid_argument("FiniteDistribution: masses must sum to 1");
}

double FiniteDistribution::label_mass(bool y) const {
  return mass_where(*this, [y](const Atom& a) { return (a.y != 0) == y; });
}

Hypothesis::Hypothesis(std::string name, Predicate contains)
    : name_(std::move(name)), contains_(std::move(contains)) {}

Hypothesis Hypothesis::everything() {
  return Hypothesis("everything", [](const ConstVec&) { return true; });
}

Hypothesis Hypothesis::nothing() {
  return Hypothesis("nothing", [](const ConstVec&) { return false; });
}

Hypothesis Hypothesis::halfspace(const Halfspace& h) {
  std::ostringstream os;
  os << "halfspace(t=" << h.t << ")";
  return Hypothesis(os.str(), [h](const ConstVec& x) { return h.contains(x); });
}

Hypothesis Hypothesis::complement() const {
  auto inner = contains_;
  return Hypothesis("not(" + name_ + ")", [inner](const ConstVec& x) { return !inner(x); });
}

HypothesisFamily::HypothesisFamily(std::vector<Hypothesis> members, bool closed_under_complement)
    : members_(std::move(members)), closed_(closed_under_complement) {
  if (members_.empty()) throw std::invalid_argument("HypothesisFamily: no members");
}

HypothesisFamily HypothesisFamily::thresholds(const std::vector<double>& cuts, std::size_t axis) {
  std::vector<Hypothesis> members;
  members.reserve(2 * cuts.size());
  for (double t : cuts) {
    const auto i = static_cast<Eigen::Index>(axis);
    members.emplace_back("x>=" + format_double(t), [t, i](const ConstVec& x) { return x[i] >= t; });
    members.emplace_back("x<" + format_double(t), [t, i](const ConstVec& x) { return x[i] < t; });
  }
  return HypothesisFamily(std::move(members), true);
}

bool HypothesisFamily::verify_complement_closure(const FiniteDistribution& dist) const {
  const auto& atoms = dist.atoms();
  std::vector<std::vector<bool>> patterns;
  patterns.reserve(members_.size());
  for (const auto& h : members_) {
    std::vector<bool> p(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) p[i] = h.contains(atoms[i].point);
    patterns.push_back(std::move(p));
  }
  for (const auto& p : patterns) {
    std::vector<bool> flipped(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) flipped[i] = !p[i];
    if (std::find(patterns.begin(), patterns.end(), flipped) == patterns.end()) return false;
  }
  return true;
}

double mass(const FiniteDistribution& dist, const Hypothesis& s) {
  return mass_where(dist, [&](const Atom& a) { return s.contains(a.point); });
}

double err_class(const FiniteDistribution& dist, const Hypothesis& s) {
  return mass_where(dist, [&](const Atom& a) { return (a.y != 0) == s.contains(a.point); });
}

double err_cond(const FiniteDistribution& dist, const Hypothesis& s, const Hypothesis& t) {
  double in_t = 0.0;
  double agree = 0.0;
  for (const auto& a : dist.atoms()) {
    if (!t.contains(a.point)) continue;
    in_t += a.mass;
    if ((a.y != 0) == s.contains(a.point)) agree += a.mass;
  }
  if (in_t <= 0.0) throw ZeroMassCondition("err_cond: conditioning set has zero mass");
  return agree / in_t;
}

Decomposition check_decomposition(const FiniteDistribution& dist, const Hypothesis& s) {
  Decomposition out{err_class(dist, s), std::nullopt, std::nullopt};
  const Hypothesis not_s = s.complement();
  const double p_in = mass(dist, s);
  const double p_out = mass(dist, not_s);
  if (p_in > 0.0)
    out.via_inside = 2.0 * err_cond(dist, s, s) * p_in + dist.label_mass(false) - p_in;
  if (p_out > 0.0)
    out.via_outside = 2.0 * err_cond(dist, s, not_s) * p_out + dist.label_mass(true) - p_out;
  return out;
}

FiniteDistribution flip_labels(const FiniteDistribution& dist) {
  std::vector<Atom> atoms = dist.atoms();
  for (auto& a : atoms) a.y = static_cast<std::uint8_t>(1 - a.y);
  return FiniteDistribution(std::move(atoms));
}

// -- reductions ------------------------------------------------------------------

std::vector<Band> population_bands(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("population_bands: epsilon must be positive");
  if (epsilon >= 1.0) return {{1, 0.0, 1.0}};
  // Trim representation noise so 1/0.05 gives 20 bands, not 21.
  const auto count = static_cast<std::size_t>(std::ceil(1.0 / epsilon - 1e-9));
  std::vector<Band> bands;
  bands.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) {
    const double a = static_cast<double>(k - 1) * epsilon;
    const double b = k == count ? std::max(1.0, static_cast<double>(k) * epsilon)
                                : static_cast<double>(k) * epsilon;
    bands.push_back({k, a, b});
  }
  return bands;
}

std::size_t estimation_sample_size(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("estimation_sample_size: bad epsilon/delta");
  const double bands = static_cast<double>(population_bands(epsilon).size());
  return static_cast<std::size_t>(std::ceil(std::log(4.0 * bands / delta) / (2.0 * epsilon * epsilon)));
}

namespace {

struct Candidate {
  Hypothesis h;
  std::size_t record;  // index into the audit log
};

// Empirical err_class on i.i.d. draws from the atoms.
class EstimationSample {
 public:
  EstimationSample(const FiniteDistribution& dist, std::size_t n, Rng rng) {
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& a : dist.atoms()) cdf.push_back(acc += a.mass);
    counts_.assign(dist.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.uniform() * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
      ++counts_[idx];
    }
    n_ = n;
  }

  double err_class(const FiniteDistribution& dist, const Hypothesis& s) const {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const auto& a = dist.atoms()[i];
      if ((a.y != 0) == s.contains(a.point)) agree += counts_[i];
    }
    return static_cast<double>(agree) / static_cast<double>(n_);
  }

 private:
  std::vector<std::size_t> counts_;
  std::size_t n_ = 0;
};

void check_inputs(const HypothesisFamily& family, const FiniteDistribution& dist, double epsilon,
                  double delta) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("reduction: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("reduction: delta must lie in (0,1)");
  if (!family.closed_under_complement() || !family.verify_complement_closure(dist))
    throw std::invalid_argument("reduction: family must be closed under complement");
}

void run_band(const ConditionalLearner& learner, const LearnerRequest& req, const Band& band,
              const char* path, bool complement_output, std::vector<BandRecord>& audit,
              std::vector<Candidate>& candidates) {
  BandRecord rec{band.k, band.a, band.b, path, "ok", std::nullopt};
  try {
    auto out = learner(req);
    if (!out) {
      rec.status = "infeasible";
    } else {
      candidates.push_back({complement_output ? out->complement() : *out, audit.size()});
    }
  } catch (const std::exception&) {
    rec.status = "failed";
  }
  audit.push_back(std::move(rec));
}

ReductionResult select_candidate(std::vector<Candidate>& candidates, std::vector<BandRecord> audit,
                                 const FiniteDistribution& dist, double epsilon, double delta,
                                 const ReductionOptions& opts) {
  if (candidates.empty()) throw std::runtime_error("reduction: learner produced no candidate");
  std::optional<EstimationSample> sample;
  std::size_t n = 0;
  if (!opts.exact) {
    n = estimation_sample_size(epsilon, delta);
    sample.emplace(dist, n, Rng(opts.seed).child("estimation"));
  }
  std::size_t best = 0;
  double best_err = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double e = sample ? sample->err_class(dist, candidates[i].h) : err_class(dist, candidates[i].h);
    audit[candidates[i].record].candidate_err = e;
    if (i == 0 || e < best_err) {
      best = i;
      best_err = e;
    }
  }
  return {candidates[best].h, best_err, std::move(audit), n};
}

}  // namespace

ReductionResult reduce_additive(const ConditionalLearner& learner, const HypothesisFamily& family,
                                const FiniteDistribution& dist, double epsilon, double delta,
                                const ReductionOptions& opts) {
  check_inputs(family, dist, epsilon, delta);
  std::vector<BandRecord> audit;
  std::vector<Candidate> candidates;
  for (const auto& band : population_bands(epsilon)) {
    const LearnerRequest req{epsilon, 0.0, epsilon * delta / 2.0, band.a, band.b, dist, family};
    run_band(learner, req, band, "direct", false, audit, candidates);
  }
  return select_candidate(candidates, std::move(audit), dist, epsilon, delta, opts);
}

ReductionResult reduce_multiplicative(const ConditionalLearner& learner,
                                      const HypothesisFamily& family,
                                      const FiniteDistribution& dist, double alpha,
                                      double epsilon, double delta, const ReductionOptions& opts) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("reduce_multiplicative: alpha must be >= 0");
  check_inputs(family, dist, epsilon, delta);
  const FiniteDistribution flipped = flip_labels(dist);
  std::vector<BandRecord> audit;
  std::vector<Candidate> candidates;
  for (const auto& band : population_bands(epsilon)) {
    const double conf = epsilon * delta / 2.0;
    // Direct run covers P[y=0] >= P[S*]; the flipped run covers P[y=1] >= P[~S*]
    // and contributes the complement of its output.
    run_band(learner, {epsilon, alpha, conf, band.a, band.b, dist, family}, band, "direct", false,
             audit, candidates);
    run_band(learner, {epsilon, alpha, conf, band.a, band.b, flipped, family}, band, "flipped",
             true, audit, candidates);
  }
  return select_candidate(candidates, std::move(audit), dist, epsilon, delta, opts);
}

void write_audit_jsonl(std::ostream& os, const std::vector<BandRecord>& audit) {
  for (const auto& r : audit) {
    nlohmann::json j{{"k", r.k},       {"a", r.a},
                     {"b", r.b},       {"path", r.path},
                     {"learner_status", r.status}};
    j["candidate_err"] = r.candidate_err ? nlohmann::json(*r.candidate_err) : nlohmann::json(nullptr);
    os << j.dump() << '\n';
  }
}

// -- random instances ---------------------------------------------------------------

namespace {

std::vector<double> random_masses(Rng& rng, std::size_t n) {
  std::vector<double> m(n);
  for (auto& v : m) v = -std::log(1.0 - rng.uniform()) + 1e-3;
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (auto& v : m) v /= total;
  // Put the rounding residue on the largest atom so the sum is 1 to within an ulp.
  const double residue = 1.0 - std::accumulate(m.begin(), m.end(), 0.0);
  *std::max_element(m.begin(), m.end()) += residue;
  return m;
}

}  // namespace

LineInstance random_line_instance(Rng& rng, std::size_t atoms, std::size_t cuts) {
  if (atoms < 1 || cuts < 1) throw std::invalid_argument("random_line_instance: sizes must be >= 1");
  // Points on a coarse grid so a point may carry both labels; a smooth
  // label bias along the line keeps the optimum away from the trivial sets.
  const double bias_center = rng.uniform() * 2.0 - 1.0;
  const double slope = (rng.uniform() * 6.0 + 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  std::set<std::pair<double, int>> used;
  std::vector<Atom> out;
  std::size_t guard = 0;
  while (out.size() < atoms) {
    if (++guard > 100000) throw std::runtime_error("random_line_instance: could not place atoms");
    const double p = std::round((rng.uniform() * 2.0 - 1.0) * 64.0) / 64.0;
    const double p1 = 1.0 / (1.0 + std::exp(-slope * (p - bias_center)));
    const int y = rng.bernoulli(0.15 + 0.7 * p1) ? 1 : 0;
    if (!used.emplace(p, y).second) continue;
    Vector point(1);
    point[0] = p;
    out.push_back({point, static_cast<std::uint8_t>(y), 0.0});
  }
  const auto masses = random_masses(rng, atoms);
  for (std::size_t i = 0; i < atoms; ++i) out[i].mass = masses[i];

  std::vector<double> cut_points(cuts);
  for (auto& c : cut_points) c = std::round((rng.uniform() * 2.2 - 1.1) * 128.0) / 128.0 + 1.0 / 256.0;
  return {FiniteDistribution(std::move(out)), HypothesisFamily::thresholds(cut_points)};
}

FiniteDistribution random_finite_distribution(Rng& rng, std::size_t atoms, std::size_t d) {
  std::vector<Atom> out;
  out.reserve(atoms);
  const auto masses = random_masses(rng, atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    Vector p(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < p.size(); ++j) p[j] = rng.normal();
    out.push_back({p, static_cast<std::uint8_t>(rng.bernoulli(0.5) ? 1 : 0), masses[i]});
  }
  return FiniteDistribution(std::move(out));
}

}  // namespace selectorlab
