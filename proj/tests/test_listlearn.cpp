#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "selectorlab/listlearn.hpp"

using namespace selectorlab;

TEST_CASE("single example 1x1 system solved by hand") {
  Matrix x(1, 2);
  x << 2, 0;
  const Dataset d(x, {1});
  SparseListConfig cfg;
  cfg.s = 1;
  cfg.m = 1;
  cfg.nu = 0.5;
  const SparseList l = sparse_list(d, cfg);
  // Coordinate 0: 2 w = 1 - 0.5. Coordinate 1 is singular and skipped.
  REQUIRE(l.size() == 1);
  CHECK(l.members[0].support == std::vector<std::size_t>{0});
  CHECK(l.members[0].weights[0] == doctest::Approx(0.25));
  CHECK(l.systems_enumerated == 2);
  CHECK(l.systems_solved == 1);
}

TEST_CASE("negative labels flip the system rows") {
  Matrix x(1, 1);
  x << -4;
  const Dataset d(x, {0});
  SparseListConfig cfg;
  cfg.m = 1;
  cfg.nu = 0.5;
  const SparseList l = sparse_list(d, cfg);
  // -1 * (-4 w) = -1 - 0.5  =>  w = -0.375
  REQUIRE(l.size() == 1);
  CHECK(l.members[0].weights[0] == doctest::Approx(-0.375));
  // A tight row sits nu on the far side of the threshold: score 1.5 for a 0 label.
  CHECK(l.members[0].predict(x.row(0).transpose()));
}

TEST_CASE("near-singular systems are skipped by the condition cutoff") {
  Matrix x(2, 2);
  x << 1, 1,
       1, 1 + 1e-12;
  const Dataset d(x, {1, 1});
  SparseListConfig cfg;
  cfg.s = 2;
  cfg.m = 2;
  CHECK(sparse_list(d, cfg).size() == 0);
  cfg.condition_cutoff = 1e15;
  CHECK(sparse_list(d, cfg).size() == 1);
}

TEST_CASE("combinations enumerate lexicographically") {
  const auto c = combinations(4, 2);
  REQUIRE(c.size() == 6);
  CHECK(c.front() == std::vector<std::size_t>{0, 1});
  CHECK(c[2] == std::vector<std::size_t>{0, 3});
  CHECK(c.back() == std::vector<std::size_t>{2, 3});
  CHECK(combinations(3, 4).empty());
  CHECK(combinations(5, 0).size() == 1);
  CHECK(enumerated_systems(10, 60, 2) == 45 * 1770);
}

TEST_CASE("every member re-solves its defining system") {
  Rng r(12);
  const auto truth = random_sparse_truth(r, 6, 2);
  const auto inst = planted_sparse_instance(r, truth, 6, 30, 0.7, 0.1);
  SparseListConfig cfg;
  cfg.s = 2;
  cfg.m = 30;
  cfg.nu = 1e-3;
  const SparseList l = sparse_list(inst.data, cfg);
  CHECK(l.size() <= enumerated_systems(6, 30, 2));
  CHECK(l.systems_enumerated == enumerated_systems(6, 30, 2));
  CHECK(l.size() + l.duplicates_removed == l.systems_solved);
  REQUIRE(l.example_tuples.size() == l.size());
  std::set<std::vector<std::size_t>> seen_support;
  for (std::size_t k = 0; k < l.size(); ++k) {
    const auto& m = l.members[k];
    CHECK(m.support.size() == 2);
    CHECK(m.support[0] < m.support[1]);
    for (std::size_t row : l.example_tuples[k]) {
      const double y = inst.data.y(row) ? 1.0 : -1.0;
      double dot = 0;
      for (std::size_t j = 0; j < 2; ++j) dot += m.weights[j] * inst.data.x(row)[static_cast<Eigen::Index>(m.support[j])];
      CHECK(std::abs(y * dot - (y - cfg.nu)) < 1e-8);
    }
  }
}

TEST_CASE("dedup removes repeated solutions only") {
  Matrix x(3, 1);
  x << 2, 2, 4;
  const Dataset d(x, {1, 1, 1});
  SparseListConfig cfg;
  cfg.m = 3;
  cfg.nu = 0.5;
  const SparseList with = sparse_list(d, cfg);
  CHECK(with.size() == 2);
  CHECK(with.duplicates_removed == 1);
  cfg.dedup = false;
  CHECK(sparse_list(d, cfg).size() == 3);
}

TEST_CASE("list output order is deterministic across runs") {
  Rng r(3);
  const auto truth = random_sparse_truth(r, 5, 2);
  const auto inst = planted_sparse_instance(r, truth, 5, 20, 0.5, 0.1);
  SparseListConfig cfg;
  cfg.s = 2;
  cfg.m = 20;
  const SparseList a = sparse_list(inst.data, cfg);
  const SparseList b = sparse_list(inst.data, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.members[i].weights == b.members[i].weights);
    CHECK(a.members[i].support == b.members[i].support);
  }
  std::ostringstream os;
  write_list_jsonl(os, a);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("threshold") == 1.0);
    ++lines;
  }
  CHECK(lines == a.size());
}

TEST_CASE("config guards") {
  Matrix x(2, 2);
  x.setOnes();
  const Dataset d(x, {1, 0});
  SparseListConfig cfg;
  cfg.s = 3;
  cfg.m = 2;
  CHECK_THROWS(sparse_list(d, cfg));
  cfg.s = 1;
  cfg.m = 3;
  CHECK_THROWS(sparse_list(d, cfg));
  cfg.m = 2;
  cfg.nu = 0.0;
  CHECK_THROWS(sparse_list(d, cfg));
}

TEST_CASE("list sample size") {
  CHECK(list_sample_size(0.5, 0.1, 0.1, 2, 10, 1.0) == 139);
  CHECK(list_sample_size(1.0, 1.0, 1.0, 1, 1, 1.0) == 1);
  // Halving alpha doubles the size up to ceiling.
  for (double a : {0.8, 0.5, 0.3}) {
    const auto m1 = list_sample_size(a, 0.2, 0.05, 2, 20, 1.0);
    const auto m2 = list_sample_size(a / 2, 0.2, 0.05, 2, 20, 1.0);
    CHECK(m2 >= 2 * m1 - 2);
    CHECK(m2 <= 2 * m1);
  }
  CHECK(list_sample_size(0.5, 0.1, 0.1, 2, 10, 1.0) >= list_sample_size(0.6, 0.1, 0.1, 2, 10, 1.0));
  CHECK_THROWS(list_sample_size(0.0, 0.1, 0.1, 2, 10, 1.0));
  CHECK_THROWS(list_sample_size(0.5, 1.5, 0.1, 2, 10, 1.0));
  CHECK_THROWS(list_sample_size(0.5, 0.1, 0.1, 0, 10, 1.0));
}

TEST_CASE("realizable case: some member satisfies every margin constraint") {
  for (std::uint64_t seed = 21; seed < 26; ++seed) {
    Rng r(seed);
    const auto truth = random_sparse_truth(r, 4, 2);
    const auto inst = planted_sparse_instance(r, truth, 4, 40, 1.0, 0.1);
    SparseListConfig cfg;
    cfg.s = 2;
    cfg.m = 40;
    const SparseList l = sparse_list(inst.data, cfg);
    bool feasible_found = false;
    for (const auto& m : l.members) {
      bool ok = true;
      for (std::size_t j = 0; j < cfg.m && ok; ++j) {
        const double y = inst.data.y(j) ? 1.0 : -1.0;
        double score = 0;
        for (std::size_t c = 0; c < m.support.size(); ++c) score += m.weights[c] * inst.data.x(j)[static_cast<Eigen::Index>(m.support[c])];
        ok = y * score >= y - cfg.nu - 1e-9;
      }
      feasible_found = feasible_found || ok;
    }
    CHECK(feasible_found);
    const Dataset fresh = sample_sparse_inliers(r, truth, 4, 10000, 0.1);
    double best = 0;
    for (const auto& m : l.members) best = std::max(best, agreement(m, truth, fresh));
    CHECK(best >= 0.9);
  }
}

TEST_CASE("planted sparse generator respects the margin and inlier rate") {
  Rng r(4);
  const auto truth = random_sparse_truth(r, 10, 2);
  double norm = 0;
  for (double w : truth.weights) norm += w * w;
  CHECK(std::sqrt(norm) == doctest::Approx(2.0));
  const auto inst = planted_sparse_instance(r, truth, 10, 5000, 0.5, 0.1);
  std::size_t inliers = 0;
  for (std::size_t i = 0; i < inst.data.size(); ++i) {
    if (!inst.inlier[i]) continue;
    ++inliers;
    double s = 0;
    for (std::size_t j = 0; j < 2; ++j) s += truth.weights[j] * inst.data.x(i)[static_cast<Eigen::Index>(truth.support[j])];
    CHECK(std::abs(s - 1.0) >= 0.1);
    CHECK(truth.predict(inst.data.x(i)) == (inst.data.y(i) == 1));
  }
  CHECK(inliers / 5000.0 == doctest::Approx(0.5).epsilon(0.06));
}
