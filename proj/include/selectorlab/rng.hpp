#ifndef SELECTORLAB_RNG_HPP
#define SELECTORLAB_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace selectorlab {

/// Seeded random stream that can be split into independent children by label.
///
/// Children are derived from (seed, label) only, never from the parent's
/// engine state, so a child stream is identical no matter how much of the
/// parent has been consumed. Normals use the polar-free Box-Muller transform
/// on 53-bit uniforms, emitted in (cos, sin) order, which keeps draws
/// bit-reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  Rng child(std::string_view label) const;
  Rng child(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  bool bernoulli(double p);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace selectorlab

#endif
