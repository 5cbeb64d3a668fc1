#ifndef SELECTORLAB_PSGD_HPP
#define SELECTORLAB_PSGD_HPP

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "selectorlab/core.hpp"
#include "selectorlab/source.hpp"

namespace selectorlab {

/// Examples already relabeled to the error indicator e = 1[c(x) != y].
struct ErrorBatch {
  Matrix features;
  std::vector<std::uint8_t> errors;

  std::size_t size() const { return errors.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  auto x(std::size_t i) const { return features.row(static_cast<Eigen::Index>(i)).transpose(); }
  std::uint8_t e(std::size_t i) const { return errors[i]; }

  static ErrorBatch from(const ErrorDistribution& dist);
};

/// Source of fresh error-labeled batches for one optimization run.
class ErrorSampler {
 public:
  virtual ~ErrorSampler() = default;
  virtual std::size_t dim() const = 0;
  virtual void next(std::size_t n, ErrorBatch& out) = 0;
  virtual bool reused_examples() const { return false; }
  std::size_t consumed() const { return consumed_; }

 protected:
  std::size_t consumed_ = 0;
};

/// Maps an example stream through a classifier: the D(c) relabeling.
class ClassifierErrorSampler final : public ErrorSampler {
 public:
  ClassifierErrorSampler(std::unique_ptr<ExampleStream> stream, const Classifier& c, std::size_t d);
  std::size_t dim() const override { return d_; }
  void next(std::size_t n, ErrorBatch& out) override;
  bool reused_examples() const override { return stream_->reused_examples(); }

 private:
  std::unique_ptr<ExampleStream> stream_;
  const Classifier& c_;
  std::size_t d_;
};

/// Standard Gaussian x with a fixed error label (e = 1 is the worst case for
/// the gradient and loss bounds).
class ConstantErrorSampler final : public ErrorSampler {
 public:
  ConstantErrorSampler(std::size_t d, bool e, Rng rng) : d_(d), e_(e), rng_(rng) {}
  std::size_t dim() const override { return d_; }
  void next(std::size_t n, ErrorBatch& out) override;

 private:
  std::size_t d_;
  bool e_;
  Rng rng_;
};

// -- surrogate loss and gradients ---------------------------------------------

/// Mean of e * max(0, <x, w>).
double surrogate_loss(const ErrorBatch& batch, const ConstVec& w);
double surrogate_loss(const ErrorDistribution& dist, const ConstVec& w);

/// e * x_{w-perp} * 1[<x, w> >= 0]; always orthogonal to w.
Vector projected_gradient(const ConstVec& x, bool e, const UnitVector& w);

/// Batch mean of projected_gradient.
Vector mean_projected_gradient(const ErrorBatch& batch, const UnitVector& w);

/// Batch mean of e * x * 1[<x, w> >= 0], the (unprojected) gradient of the
/// surrogate loss.
Vector mean_surrogate_gradient(const ErrorBatch& batch, const UnitVector& w);

// -- projected SGD -----------------------------------------------------------

struct PsgdConfig {
  std::size_t T = 1;
  std::size_t N = 1;
  UnitVector w0;
  double beta = 1.0;
  bool beta_overridden = false;
  /// Optional stationarity stop: halt once the batch gradient norm drops
  /// below (2/5) * eps * sqrt(ln(1/eps)).
  std::optional<double> early_stop_epsilon;

  /// beta = sqrt(1 / (T * d)).
  static PsgdConfig standard(std::size_t T, std::size_t N, UnitVector w0);
  PsgdConfig& override_beta(double b);
  void validate() const;
};

double stationarity_threshold(double epsilon);

/// Row i describes the step from iterate i-1 to iterate i: the batch gradient
/// norm and batch surrogate loss are measured at w(i-1).
struct PsgdTrace {
  std::vector<UnitVector> iterates;
  std::vector<double> grad_norms;
  std::vector<double> loss_estimates;
  std::size_t examples_used = 0;
  bool reused_examples = false;
  bool stopped_early = false;

  std::size_t size() const { return iterates.size(); }
};

PsgdTrace psgd(ErrorSampler& sampler, const PsgdConfig& cfg);

struct BestIterate {
  UnitVector w;
  std::size_t index;
  double joint_error;
};

/// Minimizer of empirical joint error on `holdout`; earliest index wins ties.
BestIterate best_iterate(const PsgdTrace& trace, const Dataset& holdout, const Classifier& c);
BestIterate best_of(const std::vector<UnitVector>& candidates, const Dataset& holdout,
                    const Classifier& c);

/// Columns iter,grad_norm,batch_loss,w_1..w_d; one row per iteration.
void write_trace_csv(std::ostream& os, const PsgdTrace& trace);

}  // namespace selectorlab

#endif
