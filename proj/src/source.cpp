#include "selectorlab/source.hpp"

#include <numeric>

namespace selectorlab {

namespace {

class PlantedStream final : public ExampleStream {
 public:
  PlantedStream(const PlantedModel& model, Rng rng) : model_(model), rng_(rng) {}
  Dataset next(std::size_t n) override {
    consumed_ += n;
    return sample_planted(model_, n, rng_);
  }

 private:
  const PlantedModel& model_;
  Rng rng_;
};

class FiniteStream final : public ExampleStream {
 public:
  FiniteStream(const Dataset& data, Rng rng) : data_(data), rng_(rng), order_(data.size()) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    // Fisher-Yates with our own Rng so the permutation is portable.
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng_.below(i)]);
  }

  Dataset next(std::size_t n) override {
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(data_.dim()));
    std::vector<std::uint8_t> y(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t idx;
      if (cursor_ < order_.size()) {
        idx = order_[cursor_++];
      } else {
        reused_ = true;
        idx = rng_.below(order_.size());
      }
      x.row(static_cast<Eigen::Index>(k)) = data_.features().row(static_cast<Eigen::Index>(idx));
      y[k] = data_.y(idx);
    }
    consumed_ += n;
    return Dataset(std::move(x), std::move(y));
  }

  bool reused_examples() const override { return reused_; }

 private:
  const Dataset& data_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  bool reused_ = false;
};

}  // namespace

PlantedSource::PlantedSource(PlantedModel model) : model_(std::move(model)) { model_.validate(); }

std::unique_ptr<ExampleStream> PlantedSource::open(Rng rng) const {
  return std::make_unique<PlantedStream>(model_, rng);
}

FiniteSource::FiniteSource(Dataset data) : data_(std::move(data)) {
  if (data_.empty()) throw EmptyDataset("FiniteSource: empty dataset");
}

std::unique_ptr<ExampleStream> FiniteSource::open(Rng rng) const {
  return std::make_unique<FiniteStream>(data_, rng);
}

}  // namespace selectorlab
