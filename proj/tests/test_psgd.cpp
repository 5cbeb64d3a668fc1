#include <doctest.h>

#include <cmath>
#include <sstream>

#include "selectorlab/psgd.hpp"

using namespace selectorlab;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

ErrorBatch batch_of(const Matrix& x, std::vector<std::uint8_t> e) { return ErrorBatch{x, std::move(e)}; }

}  // namespace

TEST_CASE("surrogate loss on a hand-built batch") {
  Matrix x(3, 2);
  x << 2, 0,
       -1, 5,
       0.5, 1;
  const auto b = batch_of(x, {1, 1, 0});
  // e * max(0, x_1): 2, 0, (masked)
  CHECK(surrogate_loss(b, vec({1, 0})) == doctest::Approx(2.0 / 3.0));
  CHECK(surrogate_loss(batch_of(x, {0, 0, 0}), vec({1, 0})) == 0.0);
}

TEST_CASE("projected gradient is orthogonal and includes boundary points") {
  const UnitVector w = UnitVector::basis(2, 0);
  const Vector g = projected_gradient(vec({0.0, 3.0}), true, w);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 3.0);
  CHECK(projected_gradient(vec({-0.1, 3.0}), true, w).norm() == 0.0);
  CHECK(projected_gradient(vec({1.0, 3.0}), false, w).norm() == 0.0);

  Rng r(2);
  ConstantErrorSampler s(6, true, r.child("s"));
  ErrorBatch b;
  s.next(500, b);
  for (int t = 0; t < 20; ++t) {
    const UnitVector u = UnitVector::random(r, 6);
    Vector mean = Vector::Zero(6);
    for (std::size_t i = 0; i < b.size(); ++i) mean += projected_gradient(b.x(i), b.e(i), u);
    mean /= double(b.size());
    const Vector batch_mean = mean_projected_gradient(b, u);
    CHECK((batch_mean - mean).norm() < 1e-12);
    CHECK(std::abs(batch_mean.dot(u.vec())) < 1e-12);
    const Vector full = mean_surrogate_gradient(b, u);
    CHECK((project_orthogonal(full, u) - batch_mean).norm() < 1e-12);
  }
}

TEST_CASE("step size follows sqrt(1/(T d)) unless overridden") {
  const auto cfg = PsgdConfig::standard(100, 10, UnitVector::basis(4, 0));
  CHECK(cfg.beta == doctest::Approx(std::sqrt(1.0 / 400.0)));
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.beta = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.override_beta(0.5);
  CHECK_NOTHROW(bad.validate());
  CHECK_THROWS(PsgdConfig::standard(0, 10, UnitVector::basis(4, 0)).validate());
  CHECK_THROWS(PsgdConfig(cfg).override_beta(-1.0).validate());
}

TEST_CASE("psgd keeps iterates on the sphere and is deterministic") {
  ConstantErrorSampler a(5, true, Rng(3));
  ConstantErrorSampler b(5, true, Rng(3));
  const auto cfg = PsgdConfig::standard(50, 40, UnitVector::basis(5, 1));
  const PsgdTrace ta = psgd(a, cfg);
  const PsgdTrace tb = psgd(b, cfg);
  REQUIRE(ta.size() == 50);
  CHECK(ta.examples_used == 2000);
  CHECK_FALSE(ta.reused_examples);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta.iterates[i].vec().norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ta.iterates[i].vec() == tb.iterates[i].vec());
    CHECK(ta.grad_norms[i] == tb.grad_norms[i]);
  }
}

TEST_CASE("psgd does not move without errors") {
  ConstantErrorSampler s(3, false, Rng(1));
  const PsgdTrace t = psgd(s, PsgdConfig::standard(10, 5, UnitVector::basis(3, 2)));
  for (const auto& w : t.iterates) CHECK(w.vec() == UnitVector::basis(3, 2).vec());
  for (double g : t.grad_norms) CHECK(g == 0.0);

  auto cfg = PsgdConfig::standard(10, 5, UnitVector::basis(3, 2));
  cfg.early_stop_epsilon = 0.01;
  ConstantErrorSampler s2(3, false, Rng(1));
  const PsgdTrace early = psgd(s2, cfg);
  CHECK(early.stopped_early);
  CHECK(early.size() == 1);
}

TEST_CASE("dimension mismatch between sampler and start is rejected") {
  ConstantErrorSampler s(3, true, Rng(1));
  CHECK_THROWS_AS(psgd(s, PsgdConfig::standard(2, 2, UnitVector::basis(4, 0))), DimensionMismatch);
}

TEST_CASE("psgd moves toward the planted selector") {
  // From 60 degrees off, the run ends closer to v than it started.
  Vector v(3);
  v << 0.5, std::sqrt(3.0) / 2.0, 0.0;
  const PlantedSource src(PlantedModel{3, UnitVector(v), Classifier::constant(false), 0.02, 0.5, 4});
  ClassifierErrorSampler s(src.open(Rng(8)), src.model().c_star, 3);
  const PsgdTrace t = psgd(s, PsgdConfig::standard(1000, 200, UnitVector::basis(3, 0)));
  CHECK(angle(src.model().v, t.iterates.back()) < angle(src.model().v, UnitVector::basis(3, 0)) - 0.3);
  CHECK(t.examples_used == 200000);
}

TEST_CASE("best iterate picks least holdout joint error, earliest on ties") {
  Matrix x(4, 2);
  x << 1, 0,
       1, 0.1,
       -1, 0,
       0, -1;
  const Dataset holdout(x, {1, 1, 1, 1});
  const auto c = Classifier::constant(false);  // every point is an error
  std::vector<UnitVector> cand{UnitVector::basis(2, 0), UnitVector(vec({-1, -1})), UnitVector(vec({0, -1})),
                               UnitVector(vec({-1, -1}))};
  // +e1 holds rows 0, 1 and 3 (boundary); (-1,-1) holds rows 2, 3; -e2 holds 0, 2, 3.
  const BestIterate b = best_of(cand, holdout, c);
  CHECK(b.index == 1);
  CHECK(b.joint_error == doctest::Approx(0.5));
  CHECK_THROWS(best_of({}, holdout, c));
  CHECK_THROWS_AS(best_of(cand, Dataset(), c), EmptyDataset);
}

TEST_CASE("trace csv layout") {
  ConstantErrorSampler s(2, true, Rng(1));
  const PsgdTrace t = psgd(s, PsgdConfig::standard(3, 4, UnitVector::basis(2, 0)));
  std::ostringstream os;
  write_trace_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "iter,grad_norm,batch_loss,w_1,w_2");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}
