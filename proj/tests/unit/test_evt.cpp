#include <cmath>
#include <numbers>

#include <doctest.h>

#include "fraudscore/error.hpp"
#include "fraudscore/evt.hpp"
#include "fraudscore/random.hpp"
#include "oracles.hpp"

using namespace fraudscore;
using namespace fraudscore::evt;

TEST_CASE("gumbel parameters") {
  const auto g = gumbel_params(2);
  CHECK(std::abs(g.mu - 0.552579) < 1e-6);
  CHECK(std::abs(g.sigma - 0.849322) < 1e-6);
  double prev = g.sigma;
  for (std::size_t m = 3; m < 2000; m += 7) {
    const auto h = gumbel_params(m);
    CHECK(h.sigma < prev);
    CHECK(h.sigma == doctest::Approx(1.0 / std::sqrt(2.0 * std::log(static_cast<double>(m)))));
    prev = h.sigma;
  }
  for (std::size_t m : {0u, 1u}) {
    try {
      gumbel_params(m);
      FAIL("expected DegenerateCount");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateCount);
    }
  }
}

TEST_CASE("gumbel cdf") {
  for (std::size_t m : {2u, 5u, 50u, 1000u}) {
    const auto g = gumbel_params(m);
    CHECK(std::abs(evp_given_runlength(g.mu, g) - std::exp(-1.0)) < 1e-12);
    CHECK(evp_given_runlength(1e3, g) == doctest::Approx(1.0));
    CHECK(evp_given_runlength(-1e3, g) < 1e-300);
  }
  const auto g2 = gumbel_params(2);
  const double mu = std::sqrt(2 * std::log(2.0)) -
                    (std::log(std::log(2.0)) + std::log(2 * std::numbers::pi)) /
                        (2 * std::sqrt(2 * std::log(2.0)));
  const double sigma = 1 / std::sqrt(2 * std::log(2.0));
  CHECK(evp_given_runlength(2.0, g2) ==
        doctest::Approx(std::exp(-std::exp(-(2.0 - mu) / sigma))).epsilon(1e-14));
}

TEST_CASE("single-draw law") {
  CHECK(one_sided_gaussian_cdf(0.0) == 0.0);
  CHECK(one_sided_gaussian_cdf(-1.0) == 0.0);
  CHECK(one_sided_gaussian_cdf(1.959963984540054) == doctest::Approx(0.95));
  CHECK(evp_for_count(1.3, 1) == one_sided_gaussian_cdf(1.3));
  CHECK(evp_for_count(1.3, 4) == evp_given_runlength(1.3, gumbel_params(4)));
}

TEST_CASE("first step uses the single-draw law") {
  RunLengthState s;
  CHECK(s.time() == 1);
  REQUIRE(s.mass().size() == 1);
  CHECK(s.mass()[0] == 1.0);
  const auto [p, next] = evp_step(s, 1.1);
  CHECK(p == one_sided_gaussian_cdf(1.1));
  CHECK(next.time() == 2);
  CHECK(next.mass()[0] == p);
  CHECK(next.mass()[1] == doctest::Approx(1 - p));
  CHECK(s.time() == 1);  // the input state is untouched
}

TEST_CASE("run-length mass is conserved over long random sequences") {
  Rng rng(77);
  RunLengthState s;
  for (int t = 0; t < 1000; ++t) {
    const double z = std::abs(rng.normal()) * (rng.uniform() < 0.05 ? 6.0 : 1.0);
    const double p = s.step(z);
    CHECK_UNARY(p > 0.0 || z == 0.0);
    CHECK_UNARY(p < 1.0);
    double total = 0.0;
    for (double w : s.mass()) {
      CHECK_UNARY(w >= 0.0);
      CHECK_UNARY(w <= 1.0);
      total += w;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("sequential evp equals the explicit expansion") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> z(50);
    for (auto& v : z) v = std::abs(rng.normal()) * (rng.uniform() < 0.1 ? 4.0 : 1.0);
    const auto ref = oracle::evp_expanded(z);
    RunLengthState s;
    for (std::size_t t = 0; t < z.size(); ++t) CHECK(std::abs(s.step(z[t]) - ref[t]) < 1e-12);
  }
}

TEST_CASE("repeated extreme scores concentrate mass at run length one") {
  RunLengthState s;
  for (int i = 0; i < 3; ++i) s.step(10.0);
  CHECK(s.mass()[0] > 0.99);
}

TEST_CASE("evp is nondecreasing in the score for a fixed state") {
  Rng rng(9);
  RunLengthState s;
  for (int i = 0; i < 30; ++i) s.step(std::abs(rng.normal()));
  double prev = -1.0;
  for (double z = 0.0; z < 8.0; z += 0.05) {
    auto copy = s;
    const double p = copy.step(z);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("outlier rule is strict") {
  CHECK(is_outlier(0.7, 0.6));
  CHECK_FALSE(is_outlier(0.6, 0.6));
  CHECK_FALSE(is_outlier(0.0, 0.6));
}

TEST_CASE("standardization") {
  CHECK(standardize(2.0, 2.0, 0.5) == 0.0);
  CHECK(standardize(2.0 + 2 * std::sqrt(0.5), 2.0, 0.5) == doctest::Approx(2.0));
  CHECK(standardize(2.0 - 3 * std::sqrt(0.5), 2.0, 0.5) == doctest::Approx(3.0));
  CHECK(standardize(2.0 - 3 * std::sqrt(0.5), 2.0, 0.5, EvpSide::Upper) == 0.0);
  CHECK(standardize(2.0 + 1.5, 2.0, 1.0, EvpSide::Upper) == doctest::Approx(1.5));
  try {
    standardize(1.0, 1.0, 0.0);
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroVariance);
  }
}
