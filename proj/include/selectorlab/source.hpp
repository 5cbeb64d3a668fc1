#ifndef SELECTORLAB_SOURCE_HPP
#define SELECTORLAB_SOURCE_HPP

#include <cstddef>
#include <memory>
#include <vector>

#include "selectorlab/core.hpp"

namespace selectorlab {

/// A stream of labeled examples opened from an ExampleSource with its own Rng.
class ExampleStream {
 public:
  virtual ~ExampleStream() = default;
  virtual Dataset next(std::size_t n) = 0;
  /// True once a finite stream has started drawing with replacement.
  virtual bool reused_examples() const { return false; }
  std::size_t consumed() const { return consumed_; }

 protected:
  std::size_t consumed_ = 0;
};

class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t dim() const = 0;
  virtual std::unique_ptr<ExampleStream> open(Rng rng) const = 0;
};

/// Unlimited fresh draws from a planted model.
class PlantedSource final : public ExampleSource {
 public:
  explicit PlantedSource(PlantedModel model);
  std::size_t dim() const override { return model_.d; }
  std::unique_ptr<ExampleStream> open(Rng rng) const override;
  const PlantedModel& model() const { return model_; }

 private:
  PlantedModel model_;
};

/// Draws from a fixed dataset: a seeded permutation without replacement until
/// the data is exhausted, then uniformly with replacement.
class FiniteSource final : public ExampleSource {
 public:
  explicit FiniteSource(Dataset data);
  std::size_t dim() const override { return data_.dim(); }
  std::unique_ptr<ExampleStream> open(Rng rng) const override;
  const Dataset& data() const { return data_; }

 private:
  Dataset data_;
};

}  // namespace selectorlab

#endif
