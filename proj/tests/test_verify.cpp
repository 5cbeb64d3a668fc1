#include <doctest.h>

#include <cmath>
#include <numbers>

#include "selectorlab/verify.hpp"

using namespace selectorlab;

TEST_CASE("loss bound check") {
  const auto r = check_loss_bound(5, 200000, 1);
  CHECK(r.passed);
  CHECK(r.measured == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(0.02));
  const auto zero = check_loss_bound(5, 100000, 1, false);
  CHECK(zero.measured == 0.0);
  CHECK(zero.passed);
  CHECK_THROWS_AS(check_loss_bound(5, 1000, 1), std::invalid_argument);
}

TEST_CASE("gradient bound checks") {
  const auto r = check_grad_bounds(5, 200000, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].passed);
  CHECK(r[1].passed);
  // With e = 1 the mean projected gradient vanishes and E|g|^2 = (d - 1)/2.
  CHECK(r[0].measured < 0.01);
  CHECK(r[1].measured == doctest::Approx(2.0).epsilon(0.02));
  const auto z = check_grad_bounds(3, 100000, 2, false);
  CHECK(z[0].measured == 0.0);
  CHECK(z[1].measured == 0.0);
}

TEST_CASE("smoothness check") {
  const auto r = check_smoothness(5, 30, 50000, 3);
  CHECK(r.passed);
  // Pair 0 has v = w (gap 0); every other pair leaves slack.
  CHECK(r.measured == 0.0);
  CHECK_THROWS(check_smoothness(1, 30, 100, 3));
}

TEST_CASE("psgd convergence check") {
  const auto r = check_psgd_convergence(5, 200, 200, 4, true, 20000);
  CHECK(r.passed);
  CHECK(r.bound == doctest::Approx(std::sqrt(5.0 / 200.0)));
  const auto one = check_psgd_convergence(5, 1, 10, 4, true, 20000);
  CHECK(one.passed);
  CHECK(one.bound == doctest::Approx(std::sqrt(5.0)));
  const auto zero = check_psgd_convergence(5, 50, 10, 4, false, 20000);
  CHECK(zero.measured == 0.0);
  CHECK(zero.passed);
}

TEST_CASE("stationarity certificate") {
  const PlantedModel m{2, UnitVector::basis(2, 0), Classifier::constant(false), 0.02, 0.5, 5};
  const auto at_v = check_stationarity_certificate(m, m.v, 0.01, 200000, 5);
  CHECK(at_v.passed);
  CHECK(at_v.warning_only);
  const auto behind = check_stationarity_certificate(m, UnitVector::basis(2, 1), 0.01, 100000, 5);
  CHECK(behind.vacuous);  // theta = pi/2 is outside the premise
  const auto sweep = stationarity_sweep(0.01, 9, 200000, 6);
  CHECK(sweep.size() == 9);
  for (const auto& r : sweep) CHECK_FALSE(r.failed());
  CHECK(sweep.back().vacuous);
  CHECK_FALSE(stationarity_sweep(0.001, 3, 1000, 6).front().warning_only);
  CHECK_THROWS(stationarity_sweep(0.3, 3, 1000, 6));
}

TEST_CASE("decomposition suite") {
  const auto r = check_decomposition_suite(200, 7);
  CHECK(r.passed);
  CHECK(r.measured <= 1e-12);
}

TEST_CASE("reports are reproducible from name and seed") {
  const auto a = check_smoothness(4, 10, 20000, 11);
  const auto b = check_smoothness(4, 10, 20000, 11);
  CHECK(report_to_json(a).dump() == report_to_json(b).dump());
  const auto j = report_to_json(a);
  for (const char* k : {"name", "statement", "measured", "bound", "tolerance", "passed", "n_samples", "seed"})
    CHECK(j.contains(k));
}

TEST_CASE("quick suite passes") {
  const auto reports = run_suite("quick", 1);
  CHECK(reports.size() > 10);
  for (const auto& r : reports) CHECK_MESSAGE(!r.failed(), r.name);
  CHECK_THROWS(run_suite("bogus", 1));
}
