#include <cmath>

#include <doctest.h>

#include "fraudscore/error.hpp"
#include "fraudscore/mobility.hpp"
#include "fraudscore/random.hpp"
#include "oracles.hpp"
#include "weekly_paths.hpp"

using namespace fraudscore;
using namespace fraudscore::mobility;

TEST_CASE("weekly paths pad into the 4x9 matrix") {
  const auto u = fixture::weekly_matrix();
  CHECK(u.row_count() == 4);
  CHECK(u.row_len() == 9);
  const std::vector<std::vector<RegionId>> expected{
      {7, 1, 1, 2, 0, 0, 0, 0, 0},
      {6, 6, 9, 4, 4, 4, 10, 1, 1},
      {1, 1, 1, 6, 6, 1, 12, 3, 0},
      {8, 11, 0, 0, 0, 0, 0, 0, 0},
  };
  CHECK(u.rows() == expected);
  CHECK(u.region_count() == 12);
}

TEST_CASE("chunking a path into rows") {
  std::vector<RegionId> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto one = build_path_matrix(ten, 10);
  CHECK(one.row_count() == 1);
  CHECK(one.rows()[0] == ten);

  auto eleven = ten;
  eleven.push_back(11);
  const auto two = build_path_matrix(eleven, 10);
  REQUIRE(two.row_count() == 2);
  CHECK(two.rows()[1] == std::vector<RegionId>{11, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK(two.row(1).size() == 1);

  CHECK_THROWS_AS(build_path_matrix(std::vector<RegionId>{}, 10), Error);
  CHECK_THROWS_AS(build_path_matrix(std::vector<RegionId>{1, 0, 2}, 10), Error);
  CHECK_THROWS_AS(Pattern({}), Error);
  CHECK_THROWS_AS(Pattern({1, 0}), Error);
}

TEST_CASE("reference supports") {
  const auto u = fixture::weekly_matrix();
  for (const auto& s : fixture::kReferenceSupports) {
    CAPTURE(s.pattern);
    CHECK(std::abs(support(u, Pattern(s.pattern)) - s.value) <= 1e-2);
  }
  CHECK(support(u, Pattern{6, 1}) == doctest::Approx(7.0 / 6.0).epsilon(1e-12));
  CHECK(support(u, Pattern{6, 3}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(support(u, Pattern{6, 4, 1}) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("support agrees with exhaustive embedding enumeration") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<RegionId>> rows(1 + rng.below(5));
    for (auto& r : rows) {
      r.resize(1 + rng.below(8));
      for (auto& v : r) v = static_cast<RegionId>(1 + rng.below(6));
    }
    const auto m = PathMatrix::from_rows(rows);
    for (int q = 0; q < 10; ++q) {
      std::vector<RegionId> pat(1 + rng.below(3));
      for (auto& v : pat) v = static_cast<RegionId>(1 + rng.below(6));
      CHECK(std::abs(support(m, Pattern(pat)) - oracle::support(m.rows(), pat)) < 1e-12);
    }
  }
}

TEST_CASE("extending a pattern never raises its support") {
  Rng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RegionId> path(5 + rng.below(40));
    for (auto& v : path) v = static_cast<RegionId>(1 + rng.below(5));
    const auto m = build_path_matrix(path, 1 + rng.below(10));
    std::vector<RegionId> pat(1 + rng.below(3));
    for (auto& v : pat) v = static_cast<RegionId>(1 + rng.below(5));
    const Pattern base(pat);
    const Pattern ext = base.concat(Pattern{static_cast<RegionId>(1 + rng.below(5))});
    CHECK(support(m, ext) <= support(m, base) + 1e-12);
    const double c = rule_confidence(m, base, Pattern{ext.regions().back()});
    CHECK(c >= 0.0);
    CHECK(c <= 100.0 + 1e-9);
  }
}

TEST_CASE("rule confidences of the worked example") {
  const auto u = fixture::weekly_matrix();
  CHECK(rule_confidence(u, Pattern{6}, Pattern{4, 1}) == doctest::Approx(10.0));
  CHECK(rule_confidence(u, Pattern{6, 4}, Pattern{1}) == doctest::Approx(40.0));
  CHECK(rule_confidence(u, Pattern{4}, Pattern{1}) == doctest::Approx(50.0));
  CHECK(region_confidence_assoc(u, 6, 4, 1) == doctest::Approx(50.0));
  CHECK(rule_confidence(u, Pattern{5}, Pattern{1}) == 0.0);
}

TEST_CASE("association confidence is the max of its three rules") {
  const auto u = fixture::weekly_matrix();
  for (RegionId a = 1; a <= 13; ++a) {
    for (RegionId b = 1; b <= 13; ++b) {
      for (RegionId c = 1; c <= 13; ++c) {
        const double expected = std::max({rule_confidence(u, Pattern{a}, Pattern{b, c}),
                                          rule_confidence(u, Pattern{a, b}, Pattern{c}),
                                          rule_confidence(u, Pattern{b}, Pattern{c})});
        CHECK(region_confidence_assoc(u, a, b, c) == expected);
      }
    }
  }
  // Without the earlier region only the last-region rule applies.
  CHECK(region_confidence_assoc(u, std::nullopt, 4, 1) == doctest::Approx(50.0));
  CHECK(region_confidence_assoc(u, std::nullopt, std::nullopt, 1) == 0.0);
  // A region never visited scores zero.
  CHECK(region_confidence_assoc(u, 6, 4, 13) == 0.0);
}

TEST_CASE("adjacency on the weekly paths") {
  const auto adj = build_adjacency(fixture::weekly_matrix());
  CHECK(adj.probability(4, 1) == 0.0);
  CHECK(std::abs(adj.probability(4, 4) - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(adj.probability(4, 10) - 1.0 / 3.0) < 1e-12);
  CHECK(region_confidence_adj(adj, 4, 1) == 0.0);
  CHECK(std::abs(region_confidence_adj(adj, 4, 10) - 33.33) < 0.01);
  CHECK(std::abs(region_confidence_adj(adj, 4, 4) - 66.67) < 0.01);
  // Row boundaries are not transitions: 2 -> 6 and 1 -> 1 across weeks.
  CHECK(adj.probability(2, 6) == 0.0);
  CHECK(adj.row_sum(2) == 0.0);  // 2 ends its week
  CHECK(region_confidence_adj(adj, 13, 1) == 0.0);
  for (RegionId r = 1; r <= adj.region_count(); ++r) {
    const double s = adj.row_sum(r);
    CHECK((s == 0.0 || std::abs(s - 1.0) < 1e-12));
  }
}

TEST_CASE("adjacency rows are distributions on random paths") {
  Rng rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RegionId> path(2 + rng.below(60));
    for (auto& v : path) v = static_cast<RegionId>(1 + rng.below(9));
    const auto adj = build_adjacency(path, 2 + rng.below(9));
    for (RegionId r = 1; r <= adj.region_count(); ++r) {
      const double s = adj.row_sum(r);
      CHECK((s == 0.0 || std::abs(s - 1.0) < 1e-12));
      for (RegionId q = 1; q <= adj.region_count(); ++q) {
        const double c = region_confidence_adj(adj, r, q);
        CHECK(c >= 0.0);
        CHECK(c <= 100.0);
      }
    }
  }
}

TEST_CASE("adjacency needs a transition") {
  CHECK_THROWS_AS(build_adjacency(std::vector<RegionId>{3}, 10), Error);
  try {
    build_adjacency(std::vector<RegionId>{3, 4}, 1);
    FAIL("expected EmptyPath");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyPath);
  }
}
