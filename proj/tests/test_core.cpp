#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "selectorlab/core.hpp"
#include "selectorlab/io.hpp"
#include "selectorlab/source.hpp"

using namespace selectorlab;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Dataset tiny() {
  Matrix x(4, 2);
  x << 1, 0,
       -1, 0,
       0, 1,
       0, -1;
  return Dataset(x, {1, 0, 0, 1});
}

}  // namespace

TEST_CASE("rng streams are reproducible and children ignore parent state") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng fresh(42);
  Rng c1 = a.child("x");
  Rng c2 = fresh.child("x");
  for (int i = 0; i < 10; ++i) CHECK(c1.normal() == c2.normal());
  CHECK(Rng(42).child("x").next_u64() != Rng(42).child("y").next_u64());
  CHECK(Rng(42).child(std::uint64_t{0}).next_u64() != Rng(42).child(std::uint64_t{1}).next_u64());
}

TEST_CASE("rng distributions have the right moments") {
  Rng r(7);
  const int n = 200000;
  double s = 0, s2 = 0, u = 0;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    const double v = r.uniform();
    CHECK_MESSAGE((v >= 0.0 && v < 1.0), "uniform out of range");
    u += v;
    hits += r.bernoulli(0.3);
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(u / n - 0.5) < 0.005);
  CHECK(std::abs(hits / double(n) - 0.3) < 0.005);
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
  CHECK_THROWS(r.below(0));
}

TEST_CASE("unit vectors normalize and reject degenerate input") {
  const UnitVector u(vec({3, 4}));
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[1] == doctest::Approx(0.8));
  CHECK((-u)[0] == doctest::Approx(-0.6));
  CHECK_THROWS_AS(UnitVector(vec({0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(UnitVector(vec({NAN, 1})), std::invalid_argument);
  CHECK_THROWS_AS(UnitVector(Vector(0)), std::invalid_argument);
  CHECK_THROWS(UnitVector::basis(2, 2));
  Rng r(1);
  for (int i = 0; i < 50; ++i) CHECK(UnitVector::random(r, 6).vec().norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("halfspaces count boundary points as members") {
  const auto h = Halfspace::homogeneous(UnitVector::basis(2, 0));
  CHECK(h.is_homogeneous());
  CHECK(h.contains(vec({0, 5})));
  CHECK(h.contains(vec({1e-300, 0})));
  CHECK_FALSE(h.contains(vec({-1e-300, 0})));
  const Halfspace shifted{UnitVector::basis(2, 1), 0.5};
  CHECK_FALSE(shifted.is_homogeneous());
  CHECK(shifted.contains(vec({0, 0.5})));
  CHECK_FALSE(shifted.contains(vec({0, 0.49})));
}

TEST_CASE("classifier rules") {
  const auto x = vec({1.0, -2.0, 3.0});
  CHECK(Classifier::constant(true).predict(x));
  CHECK_FALSE(Classifier::constant(false).predict(x));
  CHECK(Classifier::linear(vec({1, 0, 0}), 1.0).predict(x));
  CHECK_FALSE(Classifier::linear(vec({1, 0, 0}), 1.5).predict(x));
  const auto sparse = Classifier::sparse_linear({0, 2}, {0.25, 0.25}, 1.0);
  CHECK(sparse.predict(x));
  CHECK_FALSE(sparse.predict(vec({1.0, 0.0, 2.9})));
  CHECK_THROWS(Classifier::sparse_linear({0, 0}, {1, 1}, 1.0));
  const auto table = Classifier::table({{{1.0, -2.0, 3.0}, true}}, false);
  CHECK(table.predict(x));
  CHECK_FALSE(table.predict(vec({0, 0, 0})));
  const auto neg = Classifier::negation(sparse);
  CHECK_FALSE(neg.predict(x));
  CHECK(Classifier::negation(neg).predict(x));
  CHECK_FALSE(sparse.describe().empty());
}

TEST_CASE("dataset shape checks") {
  Matrix x(2, 3);
  x.setZero();
  CHECK_THROWS_AS(Dataset(x, {1}), DimensionMismatch);
  CHECK_THROWS(Dataset(x, {1, 2}));
  const Dataset d(x, {1, 0});
  CHECK(d.size() == 2);
  CHECK(d.dim() == 3);
  CHECK(d.head(1).size() == 1);
  CHECK(d.with_labels({0, 0}).y(0) == 0);
}

TEST_CASE("joint and conditional error on a hand-built sample") {
  const Dataset d = tiny();
  const auto c = Classifier::constant(true);
  // e = [0, 1, 1, 0]; H_{e1} holds rows 0, 2, 3.
  const auto h = Halfspace::homogeneous(UnitVector::basis(2, 0));
  CHECK(joint_error(d, c, h) == doctest::Approx(0.25));
  CHECK(selection_rate(d, h) == doctest::Approx(0.75));
  CHECK(conditional_error(d, c, h) == doctest::Approx(1.0 / 3.0));
  const auto s = selection_stats(d, c, h);
  CHECK(s.selected == 3);
  CHECK(s.selected_errors == 1);

  const Halfspace none{UnitVector::basis(2, 0), 10.0};
  CHECK(joint_error(d, c, none) == 0.0);
  CHECK_THROWS_AS(conditional_error(d, c, none), EmptySelection);
  CHECK_THROWS_AS(joint_error(Dataset(), c, h), EmptyDataset);
  CHECK_THROWS_AS(joint_error(d, c, Halfspace::homogeneous(UnitVector::basis(3, 0))), DimensionMismatch);
}

TEST_CASE("error distribution relabels by disagreement") {
  const Dataset d = tiny();
  const auto c = Classifier::linear(vec({1, 0}), 0.0);
  const ErrorDistribution e(d, c);
  // predictions [1, 0, 1, 1] vs labels [1, 0, 0, 1]
  CHECK(e.e(0) == 0);
  CHECK(e.e(1) == 0);
  CHECK(e.e(2) == 1);
  CHECK(e.e(3) == 0);
}

TEST_CASE("projection and angle properties on random inputs") {
  Rng r(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 2 + r.below(8);
    const UnitVector w = UnitVector::random(r, d);
    Vector x(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = r.normal() * 3.0;
    const Vector p = project_orthogonal(x, w);
    CHECK(std::abs(p.dot(w.vec())) < 1e-12 * (1.0 + x.norm()));
    CHECK(p.norm() <= x.norm() + 1e-12);
    const UnitVector u = UnitVector::random(r, d);
    const double a = angle(u, w);
    CHECK(a >= 0.0);
    CHECK(a <= std::numbers::pi);
    CHECK(a == doctest::Approx(angle(w, u)));
    CHECK(angle(u, -u) == doctest::Approx(std::numbers::pi));
    CHECK(angle(u, u) < 1e-7);
  }
}

TEST_CASE("planted model validation and error rates") {
  const UnitVector v = UnitVector::basis(3, 0);
  const auto c = Classifier::linear(UnitVector::basis(3, 2).vec(), 0.0);
  CHECK_THROWS(PlantedModel{3, v, c, 0.6, 0.5, 1}.validate());
  CHECK_THROWS(PlantedModel{3, v, c, -0.1, 0.5, 1}.validate());
  CHECK_THROWS(PlantedModel{2, v, c, 0.1, 0.5, 1}.validate());

  const PlantedModel m{3, v, c, 0.1, 0.4, 5};
  const Dataset d = sample_planted(m, 200000);
  const ErrorDistribution e(d, c);
  std::size_t in = 0, in_err = 0, out = 0, out_err = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.x(i)[0] >= 0) {
      ++in;
      in_err += e.e(i);
    } else {
      ++out;
      out_err += e.e(i);
    }
  }
  CHECK(in / double(d.size()) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(in_err / double(in) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(out_err / double(out) == doctest::Approx(0.4).epsilon(0.02));
  // Same seed, same sample.
  CHECK(sample_planted(m, 10).features() == d.head(10).features());
}

TEST_CASE("wedge mass between homogeneous halfspaces is theta / (2 pi)") {
  Rng r(3);
  const Dataset d = sample_gaussian(r, 4, 400000);
  for (int t = 0; t < 5; ++t) {
    const UnitVector v = UnitVector::random(r, 4);
    const UnitVector w = UnitVector::random(r, 4);
    std::size_t in_w_not_v = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
      in_w_not_v += (d.x(i).dot(w.vec()) >= 0) && !(d.x(i).dot(v.vec()) >= 0);
    const double p = angle(v, w) / (2 * std::numbers::pi);
    const double se = std::sqrt(p * (1 - p) / double(d.size()));
    CHECK(std::abs(in_w_not_v / double(d.size()) - p) < 4 * se);
  }
}

TEST_CASE("finite source draws without replacement before reusing") {
  const Dataset d = tiny();
  FiniteSource src(d);
  auto s = src.open(Rng(9));
  const Dataset first = s->next(4);
  CHECK_FALSE(s->reused_examples());
  double sum = 0;
  for (std::size_t i = 0; i < 4; ++i) sum += first.x(i).sum() * 10 + first.y(i);
  CHECK(sum == doctest::Approx(2.0));  // every row exactly once
  s->next(1);
  CHECK(s->reused_examples());
  CHECK(s->consumed() == 5);
}

TEST_CASE("dataset csv round-trips exactly") {
  Rng r(5);
  const Dataset d = sample_planted(
      PlantedModel{3, UnitVector::basis(3, 0), Classifier::constant(false), 0.2, 0.5, 8}, 50);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const std::string text = ss.str();
  CHECK(text.rfind("x_1,x_2,x_3,y\n", 0) == 0);
  const Dataset back = read_dataset_csv(ss);
  CHECK(back.features() == d.features());
  CHECK(back.labels() == d.labels());

  std::stringstream bad("x_1,y\n0.5,2\n");
  CHECK_THROWS(read_dataset_csv(bad));
  std::stringstream ragged("x_1,x_2,y\n0.5,1\n");
  CHECK_THROWS(read_dataset_csv(ragged));
}

TEST_CASE("classifier and model json round-trip") {
  const std::vector<Classifier> cs{
      Classifier::constant(true), Classifier::linear(vec({0.1, -0.2}), 0.3),
      Classifier::sparse_linear({1}, {0.25}, 1.0), Classifier::table({{{1.0, 2.0}, true}}, false),
      Classifier::negation(Classifier::linear(vec({1, 1}), 0.0))};
  Rng r(4);
  const Dataset probe = sample_gaussian(r, 2, 200);
  for (const auto& c : cs) {
    const Classifier back = classifier_from_json(nlohmann::json::parse(classifier_to_json(c).dump()));
    for (std::size_t i = 0; i < probe.size(); ++i) CHECK(back.predict(probe.x(i)) == c.predict(probe.x(i)));
    CHECK(back.predict(vec({1.0, 2.0})) == c.predict(vec({1.0, 2.0})));
  }
  const PlantedModel m{2, UnitVector(vec({1, 1})), cs[1], 0.05, 0.5, 17};
  const PlantedModel back = planted_model_from_json(planted_model_to_json(m));
  CHECK((back.v.vec() - m.v.vec()).norm() < 1e-15);
  CHECK(back.p_in == m.p_in);
  CHECK(back.seed == 17);
  CHECK_THROWS(classifier_from_json(nlohmann::json{{"kind", "bogus"}}));
}
