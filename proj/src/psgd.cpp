#include "selectorlab/psgd.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "selectorlab/io.hpp"

namespace selectorlab {

ErrorBatch ErrorBatch::from(const ErrorDistribution& dist) {
  ErrorBatch b;
  b.features = dist.base().features();
  b.errors.resize(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) b.errors[i] = dist.e(i);
  return b;
}

ClassifierErrorSampler::ClassifierErrorSampler(std::unique_ptr<ExampleStream> stream,
                                               const Classifier& c, std::size_t d)
    : stream_(std::move(stream)), c_(c), d_(d) {}

void ClassifierErrorSampler::next(std::size_t n, ErrorBatch& out) {
  Dataset raw = stream_->next(n);
  require_same_dim(raw.dim(), d_, "ClassifierErrorSampler");
  out = ErrorBatch::from(ErrorDistribution(raw, c_));
  consumed_ += n;
}

void ConstantErrorSampler::next(std::size_t n, ErrorBatch& out) {
  out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d_));
  double* p = out.features.data();
  for (std::size_t k = 0; k < n * d_; ++k) p[k] = rng_.normal();
  out.errors.assign(n, e_ ? 1 : 0);
  consumed_ += n;
}

namespace {

template <class Batch>
double surrogate_loss_impl(const Batch& batch, const ConstVec& w) {
  if (batch.size() == 0) throw EmptyDataset("surrogate_loss: empty batch");
  require_same_dim(batch.dim(), static_cast<std::size_t>(w.size()), "surrogate_loss");
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch.e(i)) continue;
    const double m = batch.x(i).dot(w);
    if (m > 0.0) sum += m;
  }
  return sum / static_cast<double>(batch.size());
}

// Sum of e * x over examples with <x, w> >= 0.
Vector selected_error_sum(const ErrorBatch& batch, const UnitVector& w) {
  if (batch.size() == 0) throw EmptyDataset("gradient: empty batch");
  require_same_dim(batch.dim(), w.dim(), "gradient");
  Vector s = Vector::Zero(static_cast<Eigen::Index>(batch.dim()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch.e(i)) continue;
    const auto xi = batch.x(i);
    if (xi.dot(w.vec()) >= 0.0) s += xi;
  }
  return s;
}

}  // namespace

double surrogate_loss(const ErrorBatch& batch, const ConstVec& w) {
  return surrogate_loss_impl(batch, w);
}

double surrogate_loss(const ErrorDistribution& dist, const ConstVec& w) {
  return surrogate_loss_impl(dist, w);
}

Vector projected_gradient(const ConstVec& x, bool e, const UnitVector& w) {
  require_same_dim(static_cast<std::size_t>(x.size()), w.dim(), "projected_gradient");
  if (!e || x.dot(w.vec()) < 0.0) return Vector::Zero(x.size());
  return project_orthogonal(x, w);
}

Vector mean_projected_gradient(const ErrorBatch& batch, const UnitVector& w) {
  // Projection is linear, so project the selected sum once.
  const Vector s = selected_error_sum(batch, w) / static_cast<double>(batch.size());
  return project_orthogonal(s, w);
}

Vector mean_surrogate_gradient(const ErrorBatch& batch, const UnitVector& w) {
  return selected_error_sum(batch, w) / static_cast<double>(batch.size());
}

PsgdConfig PsgdConfig::standard(std::size_t T, std::size_t N, UnitVector w0) {
  const double d = static_cast<double>(w0.dim());
  const double beta = std::sqrt(1.0 / (static_cast<double>(T) * d));
  return PsgdConfig{T, N, std::move(w0), beta, false, std::nullopt};
}

PsgdConfig& PsgdConfig::override_beta(double b) {
  beta = b;
  beta_overridden = true;
  return *this;
}

void PsgdConfig::validate() const {
  if (T < 1 || N < 1) throw std::invalid_argument("PsgdConfig: T and N must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("PsgdConfig: beta must be positive and finite");
  if (!beta_overridden) {
    const double expected = std::sqrt(1.0 / (static_cast<double>(T) * static_cast<double>(w0.dim())));
    if (std::abs(beta - expected) > 1e-15 * expected)
      throw std::invalid_argument("PsgdConfig: beta differs from sqrt(1/(T d)) without override");
  }
  if (early_stop_epsilon && !(*early_stop_epsilon > 0.0 && *early_stop_epsilon < 1.0))
    throw std::invalid_argument("PsgdConfig: early-stop epsilon must lie in (0, 1)");
}

double stationarity_threshold(double epsilon) {
  return 0.4 * epsilon * std::sqrt(std::log(1.0 / epsilon));
}

PsgdTrace psgd(ErrorSampler& sampler, const PsgdConfig& cfg) {
  cfg.validate();
  require_same_dim(sampler.dim(), cfg.w0.dim(), "psgd");
  const std::optional<double> stop_below =
      cfg.early_stop_epsilon ? std::optional<double>(stationarity_threshold(*cfg.early_stop_epsilon))
                             : std::nullopt;

  PsgdTrace trace;
  trace.iterates.reserve(cfg.T);
  trace.grad_norms.reserve(cfg.T);
  trace.loss_estimates.reserve(cfg.T);

  UnitVector w = cfg.w0;
  ErrorBatch batch;
  for (std::size_t i = 1; i <= cfg.T; ++i) {
    sampler.next(cfg.N, batch);
    const Vector g = mean_projected_gradient(batch, w);
    const double gnorm = g.norm();
    trace.grad_norms.push_back(gnorm);
    trace.loss_estimates.push_back(surrogate_loss(batch, w.vec()));

    const Vector u = w.vec() - cfg.beta * g;
    // g is orthogonal to w, so |u|^2 = 1 + beta^2 |g|^2 >= 1.
    if (u.norm() < 1.0 - 1e-12) throw std::logic_error("psgd: update shrank below unit norm");
    w = UnitVector(u);
    trace.iterates.push_back(w);

    if (stop_below && gnorm < *stop_below) {
      trace.stopped_early = true;
      break;
    }
  }
  trace.examples_used = sampler.consumed();
  trace.reused_examples = sampler.reused_examples();
  return trace;
}

BestIterate best_of(const std::vector<UnitVector>& candidates, const Dataset& holdout,
                    const Classifier& c) {
  if (candidates.empty()) throw std::invalid_argument("best_of: no candidates");
  if (holdout.empty()) throw EmptyDataset("best_of: empty holdout");
  require_same_dim(holdout.dim(), candidates.front().dim(), "best_of");

  // Only misclassified holdout points contribute to joint error.
  const ErrorDistribution dist(holdout, c);
  std::vector<Eigen::Index> wrong;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist.e(i)) wrong.push_back(static_cast<Eigen::Index>(i));
  Matrix errs(static_cast<Eigen::Index>(wrong.size()), static_cast<Eigen::Index>(holdout.dim()));
  for (std::size_t k = 0; k < wrong.size(); ++k)
    errs.row(static_cast<Eigen::Index>(k)) = holdout.features().row(wrong[k]);

  std::size_t best = 0;
  std::size_t best_count = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Vector m = errs * candidates[k].vec();
    const auto count = static_cast<std::size_t>((m.array() >= 0.0).count());
    if (count < best_count) {
      best_count = count;
      best = k;
    }
  }
  return {candidates[best], best,
          static_cast<double>(best_count) / static_cast<double>(holdout.size())};
}

BestIterate best_iterate(const PsgdTrace& trace, const Dataset& holdout, const Classifier& c) {
  if (trace.iterates.empty()) throw std::invalid_argument("best_iterate: empty trace");
  return best_of(trace.iterates, holdout, c);
}

void write_trace_csv(std::ostream& os, const PsgdTrace& trace) {
  const std::size_t d = trace.iterates.empty() ? 0 : trace.iterates.front().dim();
  os << "iter,grad_norm,batch_loss";
  for (std::size_t j = 0; j < d; ++j) os << ",w_" << (j + 1);
  os << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    os << (i + 1) << ',' << format_double(trace.grad_norms[i]) << ','
       << format_double(trace.loss_estimates[i]);
    for (std::size_t j = 0; j < d; ++j) os << ',' << format_double(trace.iterates[i][j]);
    os << '\n';
  }
}

}  // namespace selectorlab
