#include "selectorlab/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <stdexcept>

#include "selectorlab/oracle.hpp"
#include "selectorlab/parallel.hpp"
#include "selectorlab/psgd.hpp"
#include "selectorlab/reduction.hpp"
#include "selectorlab/source.hpp"

namespace selectorlab {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
constexpr std::size_t kChunk = 100000;

CheckReport make_report(std::string name, std::string statement, double measured, double bound,
                        double tolerance, std::size_t n, std::uint64_t seed) {
  CheckReport r;
  r.name = std::move(name);
  r.statement = std::move(statement);
  r.measured = measured;
  r.bound = bound;
  r.tolerance = tolerance;
  r.passed = measured <= bound + tolerance;
  r.n_samples = n;
  r.seed = seed;
  return r;
}

std::string dim_tag(std::size_t d) { return "[d=" + std::to_string(d) + "]"; }

// Draws n points in chunks and hands each chunk to `body`.
void for_chunks(ErrorSampler& sampler, std::size_t n, const std::function<void(const ErrorBatch&)>& body) {
  ErrorBatch batch;
  for (std::size_t done = 0; done < n;) {
    const std::size_t k = std::min(kChunk, n - done);
    sampler.next(k, batch);
    body(batch);
    done += k;
  }
}

// Sums of e * x * 1[<x, w> >= 0] for every direction in `dirs`.
std::vector<Vector> selected_error_sums(ErrorSampler& sampler, std::size_t n,
                                        const std::vector<UnitVector>& dirs) {
  const std::size_t d = sampler.dim();
  std::vector<Vector> sums(dirs.size(), Vector::Zero(static_cast<Eigen::Index>(d)));
  for_chunks(sampler, n, [&](const ErrorBatch& b) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (!b.e(i)) continue;
      const auto x = b.x(i);
      for (std::size_t k = 0; k < dirs.size(); ++k)
        if (x.dot(dirs[k].vec()) >= 0.0) sums[k] += x;
    }
  });
  return sums;
}

PlantedModel planted_plane_model(double p_in, double p_out, std::uint64_t seed) {
  return PlantedModel{2, UnitVector::basis(2, 0), Classifier::constant(false), p_in, p_out, seed};
}

}  // namespace

nlohmann::json report_to_json(const CheckReport& r) {
  return {{"name", r.name},         {"statement", r.statement}, {"measured", r.measured},
          {"bound", r.bound},       {"tolerance", r.tolerance}, {"passed", r.passed},
          {"vacuous", r.vacuous},   {"warning_only", r.warning_only},
          {"n_samples", r.n_samples}, {"seed", r.seed}};
}

CheckReport check_loss_bound(std::size_t d, std::size_t n, std::uint64_t seed, bool e) {
  if (n < kMinBoundSamples) throw std::invalid_argument("check_loss_bound: n must be >= 1e5");
  Rng rng(seed);
  Rng wr = rng.child("direction");
  const UnitVector w = UnitVector::random(wr, d);
  ConstantErrorSampler sampler(d, e, rng.child("loss_bound"));
  double sum = 0.0;
  for_chunks(sampler, n, [&](const ErrorBatch& b) { sum += surrogate_loss(b, w.vec()) * static_cast<double>(b.size()); });
  return make_report("loss_bound" + dim_tag(d), "E[e max(0, <x,w>)] <= 1/sqrt(2 pi)",
                     sum / static_cast<double>(n), kInvSqrt2Pi, 0.005, n, seed);
}

std::vector<CheckReport> check_grad_bounds(std::size_t d, std::size_t n, std::uint64_t seed, bool e) {
  if (n < kMinBoundSamples) throw std::invalid_argument("check_grad_bounds: n must be >= 1e5");
  Rng rng(seed);
  Rng wr = rng.child("direction");
  const UnitVector w = UnitVector::random(wr, d);
  ConstantErrorSampler sampler(d, e, rng.child("grad_bounds"));
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(d));
  double sq = 0.0;
  for_chunks(sampler, n, [&](const ErrorBatch& b) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Vector g = projected_gradient(b.x(i), b.e(i), w);
      sum += g;
      sq += g.squaredNorm();
    }
  });
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return {make_report("grad_mean_norm" + dim_tag(d), "|E g_w| <= 1/sqrt(2 pi)", (sum / nn).norm(),
                      kInvSqrt2Pi, 0.005, n, seed),
          make_report("grad_second_moment" + dim_tag(d), "E|g_w|^2 <= d/2", sq / nn, dd / 2.0,
                      0.05 * dd, n, seed)};
}

CheckReport check_smoothness(std::size_t d, std::size_t pairs, std::size_t n, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("check_smoothness: d must be >= 2");
  if (pairs < 2 || n < 1) throw std::invalid_argument("check_smoothness: need >= 2 pairs and n >= 1");
  Rng rng(seed);
  Rng dr = rng.child("directions");
  const UnitVector v = UnitVector::random(dr, d);
  const PlantedSource source(PlantedModel{d, v, Classifier::constant(false), 0.1, 0.6, seed});
  const Classifier& c = source.model().c_star;
  ClassifierErrorSampler sampler(source.open(rng.child("sample")), c, d);
  ErrorBatch b;
  sampler.next(n, b);

  std::vector<Eigen::Index> wrong;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.e(i)) wrong.push_back(static_cast<Eigen::Index>(i));
  Matrix errs(static_cast<Eigen::Index>(wrong.size()), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < wrong.size(); ++k) errs.row(static_cast<Eigen::Index>(k)) = b.features.row(wrong[k]);
  const Vector sqnorm = errs.rowwise().squaredNorm();
  const double nn = static_cast<double>(n);

  double worst = -std::numeric_limits<double>::infinity();
  double worst_se = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const UnitVector a = UnitVector::random(dr, d);
    const UnitVector other = p == 0 ? a : p == 1 ? -a : UnitVector::random(dr, d);
    const Vector ma = errs * a.vec();
    const Vector mb = errs * other.vec();
    Vector diff = Vector::Zero(static_cast<Eigen::Index>(d));
    double disagree_sq = 0.0;
    for (Eigen::Index k = 0; k < errs.rows(); ++k) {
      const bool ia = ma[k] >= 0.0, ib = mb[k] >= 0.0;
      if (ia == ib) continue;
      diff += (ia ? 1.0 : -1.0) * errs.row(k).transpose();
      disagree_sq += sqnorm[k];
    }
    const double gap = (diff / nn).norm() - 2.0 * (a.vec() - other.vec()).norm();
    if (gap > worst) worst = gap;
    worst_se = std::max(worst_se, std::sqrt(disagree_sq / nn) / std::sqrt(nn));
  }
  return make_report("smoothness" + dim_tag(d), "|grad L(w) - grad L(v)| <= 2 |w - v|", worst, 0.0,
                     3.0 * worst_se, n, seed);
}

namespace {

struct ConvergenceRun {
  double mean_sq;
  double sd_of_mean;
  double noise_floor;
  std::size_t samples;
};

ConvergenceRun convergence_run(std::size_t d, std::size_t T, std::size_t N, const Rng& rng, bool e,
                               std::size_t population_n) {
  ConstantErrorSampler train(d, e, rng.child("train"));
  const PsgdTrace trace = psgd(train, PsgdConfig::standard(T, N, UnitVector::basis(d, 0)));
  // Gradient i is taken at w(i-1); position 0 is the start w0.
  std::vector<const UnitVector*> points;
  const UnitVector w0 = UnitVector::basis(d, 0);
  for (std::size_t j = 0; j < T; j += 10) points.push_back(j == 0 ? &w0 : &trace.iterates[j - 1]);

  ConstantErrorSampler pop(d, e, rng.child("population"));
  std::vector<double> values;
  double floor_sum = 0.0;
  ErrorBatch b;
  for (const UnitVector* w : points) {
    pop.next(population_n, b);
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(d));
    double sq = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Vector g = projected_gradient(b.x(i), b.e(i), *w);
      sum += g;
      sq += g.squaredNorm();
    }
    const double nn = static_cast<double>(population_n);
    values.push_back((sum / nn).squaredNorm());
    floor_sum += sq / nn / nn;
  }
  const double k = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= k;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd_of_mean = values.size() > 1 ? std::sqrt(var / (k - 1.0) / k) : 0.0;
  return {mean, sd_of_mean, floor_sum / k, train.consumed() + pop.consumed()};
}

}  // namespace

CheckReport check_psgd_convergence(std::size_t d, std::size_t T, std::size_t N, std::uint64_t seed,
                                   bool e, std::size_t population_n) {
  if (d < 1 || T < 1 || N < 1 || population_n < 1)
    throw std::invalid_argument("check_psgd_convergence: bad parameters");
  const ConvergenceRun r = convergence_run(d, T, N, Rng(seed).child("convergence"), e, population_n);
  const double bound = std::sqrt(static_cast<double>(d) / static_cast<double>(T));
  return make_report("psgd_convergence" + dim_tag(d), "mean_t |E g_{w_t}|^2 <= sqrt(d/T)", r.mean_sq,
                     bound, 3.0 * std::max(r.sd_of_mean, r.noise_floor), r.samples, seed);
}

CheckReport check_psgd_convergence_averaged(std::size_t d, std::size_t T, std::size_t N,
                                            std::uint64_t seed, std::size_t runs) {
  if (runs < 2) throw std::invalid_argument("check_psgd_convergence_averaged: need >= 2 runs");
  std::vector<ConvergenceRun> out(runs);
  const Rng root = Rng(seed).child("convergence_avg");
  parallel_for(runs, [&](std::size_t i) { out[i] = convergence_run(d, T, N, root.child(static_cast<std::uint64_t>(i)), true, 100000); });
  double mean = 0.0, floor = 0.0;
  std::size_t samples = 0;
  for (const auto& r : out) {
    mean += r.mean_sq;
    floor += r.noise_floor;
    samples += r.samples;
  }
  const double k = static_cast<double>(runs);
  mean /= k;
  floor /= k;
  double var = 0.0;
  for (const auto& r : out) var += (r.mean_sq - mean) * (r.mean_sq - mean);
  const double sd = std::sqrt(var / (k - 1.0) / k);
  const double bound = std::sqrt(static_cast<double>(d) / static_cast<double>(T));
  return make_report("psgd_convergence_avg" + dim_tag(d), "E mean_t |E g_{w_t}|^2 <= sqrt(d/T)", mean,
                     bound, 3.0 * std::max(sd, floor), samples, seed);
}

namespace {

CheckReport certificate_report(const PlantedModel& model, const UnitVector& w, double epsilon,
                               double grad_norm, std::size_t n, std::uint64_t seed, const std::string& name) {
  const double threshold = stationarity_threshold(epsilon);
  const double theta = angle(model.v, w);
  const double target = 2.5 * std::sqrt(epsilon * std::sqrt(std::log(1.0 / epsilon)));
  const double joint = planted_joint_error(model, w);
  CheckReport r = make_report(name, "|E g_w| < (2/5) eps sqrt(ln 1/eps), theta < pi/2 => joint < (5/2) (eps sqrt(ln 1/eps))^(1/2)",
                              joint, target, 0.0, n, seed);
  // The implication is strict; an exact tie is a violation.
  r.passed = joint < target;
  if (!(grad_norm < threshold && theta < std::numbers::pi / 2.0)) {
    r.vacuous = true;
    r.passed = true;
  }
  r.warning_only = epsilon > 1e-3;
  return r;
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("stationarity: epsilon must lie in (0, 1)");
}

}  // namespace

CheckReport check_stationarity_certificate(const PlantedModel& model, const UnitVector& w,
                                           double epsilon, std::size_t n, std::uint64_t seed) {
  require_epsilon(epsilon);
  if (n < 1) throw std::invalid_argument("check_stationarity_certificate: n must be >= 1");
  const PlantedSource source(model);
  ClassifierErrorSampler sampler(source.open(Rng(seed).child("certificate")), source.model().c_star, model.d);
  const auto sums = selected_error_sums(sampler, n, {w});
  const double g = project_orthogonal(sums[0] / static_cast<double>(n), w).norm();
  return certificate_report(model, w, epsilon, g, n, seed, "stationarity_certificate");
}

std::vector<CheckReport> stationarity_sweep(double epsilon, std::size_t angles, std::size_t n,
                                            std::uint64_t seed) {
  require_epsilon(epsilon);
  if (angles < 2 || n < 1) throw std::invalid_argument("stationarity_sweep: need >= 2 angles and n >= 1");
  if (2.0 * epsilon > 0.5) throw std::invalid_argument("stationarity_sweep: epsilon must be <= 0.25");
  const PlantedSource source(planted_plane_model(2.0 * epsilon, 0.5, seed));
  std::vector<UnitVector> dirs;
  for (std::size_t k = 0; k < angles; ++k) {
    const double theta = std::numbers::pi * static_cast<double>(k) / static_cast<double>(angles - 1);
    Vector w(2);
    w << std::cos(theta), std::sin(theta);
    dirs.emplace_back(w);
  }
  ClassifierErrorSampler sampler(source.open(Rng(seed).child("sweep")), source.model().c_star, 2);
  const auto sums = selected_error_sums(sampler, n, dirs);
  std::vector<CheckReport> out;
  for (std::size_t k = 0; k < angles; ++k) {
    const double g = project_orthogonal(sums[k] / static_cast<double>(n), dirs[k]).norm();
    out.push_back(certificate_report(source.model(), dirs[k], epsilon, g, n, seed,
                                     "stationarity_sweep[k=" + std::to_string(k) + "]"));
  }
  return out;
}

CheckReport check_decomposition_suite(std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_decomposition_suite: trials must be >= 1");
  Rng rng = Rng(seed).child("decomposition");
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t atoms = 1 + rng.below(32);
    const FiniteDistribution dist = random_finite_distribution(rng, atoms, 2);
    auto chosen = std::make_shared<std::set<std::vector<double>>>();
    for (const auto& a : dist.atoms())
      if (rng.bernoulli(0.5)) chosen->insert(std::vector<double>(a.point.data(), a.point.data() + a.point.size()));
    const Hypothesis s("random_subset", [chosen](const ConstVec& x) {
      return chosen->count(std::vector<double>(x.data(), x.data() + x.size())) > 0;
    });
    const Decomposition dec = check_decomposition(dist, s);
    if (dec.via_inside) worst = std::max(worst, std::abs(dec.lhs - *dec.via_inside));
    if (dec.via_outside) worst = std::max(worst, std::abs(dec.lhs - *dec.via_outside));
  }
  return make_report("error_decomposition", "err(S) = 2 err(S|S) P[S] + P[y=0] - P[S] = 2 err(S|~S) P[~S] + P[y=1] - P[~S]",
                     worst, 1e-12, 0.0, trials, seed);
}

std::vector<CheckReport> run_suite(const std::string& suite, std::uint64_t seed) {
  struct Params {
    std::size_t bound_n, smooth_pairs, smooth_n, T, N, sweep_angles, sweep_n, decomp_trials;
    double sweep_eps;
  };
  Params p;
  if (suite == "default") {
    p = {1000000, 100, 100000, 2000, 2000, 33, 1000000, 1000, 0.01};
  } else if (suite == "quick") {
    p = {100000, 20, 20000, 200, 200, 9, 100000, 200, 0.01};
  } else {
    throw std::invalid_argument("run_suite: unknown suite '" + suite + "' (expected default or quick)");
  }

  const Rng root(seed);
  auto s = [&](const char* label) { return root.child(label).seed(); };
  std::vector<std::function<std::vector<CheckReport>()>> tasks;
  for (std::size_t d : {2, 5, 20}) {
    tasks.push_back([=] { return std::vector<CheckReport>{check_loss_bound(d, p.bound_n, s("loss") + d)}; });
    tasks.push_back([=] { return check_grad_bounds(d, p.bound_n, s("grad") + d); });
  }
  tasks.push_back([=] { return std::vector<CheckReport>{check_smoothness(5, p.smooth_pairs, p.smooth_n, s("smooth"))}; });
  tasks.push_back([=] { return std::vector<CheckReport>{check_psgd_convergence(5, p.T, p.N, s("psgd"))}; });
  tasks.push_back([=] { return stationarity_sweep(p.sweep_eps, p.sweep_angles, p.sweep_n, s("stationarity")); });
  tasks.push_back([=] { return std::vector<CheckReport>{check_decomposition_suite(p.decomp_trials, s("decomposition"))}; });

  std::vector<std::vector<CheckReport>> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) { results[i] = tasks[i](); });
  std::vector<CheckReport> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

}  // namespace selectorlab
