#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "fraudscore/ar.hpp"
#include "fraudscore/error.hpp"
#include "fraudscore/random.hpp"
#include "oracles.hpp"

using namespace fraudscore;
using namespace fraudscore::ar;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("differencing") {
  CHECK(difference(std::vector<double>{1, 2, 4}, 1) == std::vector<double>{1, 2});
  CHECK(difference(std::vector<double>{5, 5, 5}, 1) == std::vector<double>{0, 0});
  const auto s = noise(20, 1);
  CHECK(difference(s, 0) == s);
  CHECK(difference(std::vector<double>{1, 4, 9, 16}, 2) == std::vector<double>{2, 2});
  CHECK(kind_of([] { difference(std::vector<double>{1, 2}, 2); }) == ErrorKind::SeriesTooShort);
}

TEST_CASE("noise-free AR(1) with intercept is recovered") {
  std::vector<double> y{0.0};
  for (int i = 0; i < 25; ++i) y.push_back(1.0 + 0.5 * y.back());
  const auto m = fit_ar(y, 1);
  REQUIRE(m.coefficients.size() == 2);
  CHECK(std::abs(m.coefficients[0] - 1.0) < 1e-8);
  CHECK(std::abs(m.coefficients[1] - 0.5) < 1e-8);
  CHECK(m.noise_variance < 1e-12);
  CHECK(rmse(m) < 1e-6);
}

TEST_CASE("constant series predicts the constant with zero noise") {
  const std::vector<double> y(30, 4.2);
  const auto m = fit_ar(y, 1);
  const auto f = predict_next(m, std::vector<double>{4.2}, 2.0);
  CHECK(std::abs(f.mean - 4.2) < 1e-12);
  CHECK(m.noise_variance < 1e-12);
}

TEST_CASE("random series matches brute-force normal equations") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto y = noise(40, seed);
    const auto m = fit_ar(y, 3);
    const auto ref = oracle::ar_normal_equations(y, 3);
    for (std::size_t j = 0; j < ref.size(); ++j) CHECK(std::abs(m.coefficients[j] - ref[j]) < 1e-8);
  }
}

TEST_CASE("residuals are orthogonal to the design and set the noise variance") {
  const auto y = noise(60, 9);
  const auto m = fit_ar(y, 4);
  const auto r = residuals(m, y);
  REQUIRE(r.size() == 56);
  double ss = 0.0, mean = 0.0, ynorm = 0.0;
  for (double v : r) {
    ss += v * v;
    mean += v;
  }
  for (double v : y) ynorm = std::max(ynorm, std::abs(v));
  mean /= static_cast<double>(r.size());
  CHECK(std::abs(ss / static_cast<double>(r.size()) - m.noise_variance) < 1e-12);
  // The intercept column makes the residual mean zero, so rmse is their std.
  double var = 0.0;
  for (double v : r) var += (v - mean) * (v - mean);
  CHECK(std::abs(std::sqrt(var / static_cast<double>(r.size())) - rmse(m)) < 1e-9);
  for (int j = 0; j <= 4; ++j) {
    double dot = 0.0;
    for (std::size_t row = 0; row < r.size(); ++row) {
      dot += (j == 0 ? 1.0 : y[row + 4 - static_cast<std::size_t>(j)]) * r[row];
    }
    CHECK(std::abs(dot) < 1e-8 * ynorm);
  }
}

TEST_CASE("prediction arithmetic") {
  ArModel identity;
  identity.coefficients = {0.0, 1.0};
  identity.p = 1;
  CHECK(predict_next(identity, std::vector<double>{3.2}, 2.0).mean == doctest::Approx(3.2));

  ArModel m;
  m.coefficients = {1.0, 0.5};
  m.p = 1;
  m.noise_variance = 0.25;
  const auto f = predict_next(m, std::vector<double>{2.0}, 2.0);
  CHECK(f.mean == doctest::Approx(2.0));
  CHECK(f.upper - f.mean == doctest::Approx(1.0));
  CHECK(f.lower <= f.mean);
  CHECK(kind_of([&] { predict_next(m, std::vector<double>{1.0, 2.0}, 2.0); }) ==
        ErrorKind::WrongLagCount);
}

TEST_CASE("prediction is affine in the lags") {
  const auto y = noise(50, 4);
  const auto m = fit_ar(y, 3);
  const std::vector<double> r1{0.3, -1.0, 2.0}, r2{1.5, 0.2, -0.7};
  for (double alpha : {0.0, 0.25, 0.5, 0.9}) {
    std::vector<double> mix(3);
    for (int i = 0; i < 3; ++i) mix[i] = alpha * r1[i] + (1 - alpha) * r2[i];
    const double lhs = predict_next(m, mix, 2.0).mean;
    const double rhs = alpha * predict_next(m, r1, 2.0).mean + (1 - alpha) * predict_next(m, r2, 2.0).mean;
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("fit errors") {
  CHECK(kind_of([] { fit_ar(std::vector<double>{1, 2, 3, 4}, 2); }) == ErrorKind::SeriesTooShort);
  // Nearly constant lags with a response that is not fitted exactly.
  Rng rng(3);
  std::vector<double> z;
  for (int i = 0; i < 40; ++i) z.push_back(1.0 + 1e-7 * rng.normal());
  CHECK(kind_of([&] { fit_ar(z, 1); }) == ErrorKind::SingularDesign);
}

TEST_CASE("window keeps only recent observations") {
  auto y = noise(80, 12);
  ArFitOptions o;
  o.window = 30;
  const auto windowed = fit_ar(y, 2, o);
  const auto tail = fit_ar(std::span<const double>(y).last(30), 2);
  CHECK(windowed.coefficients == tail.coefficients);
  CHECK(windowed.rows == 28);
}

TEST_CASE("zero padding keeps every row") {
  const auto y = noise(30, 2);
  ArFitOptions o;
  o.padding = LagPadding::Zero;
  const auto m = fit_ar(y, 3, o);
  CHECK(m.rows == 30);
  CHECK(fit_ar(y, 3).rows == 27);
}

TEST_CASE("differenced models forecast levels") {
  // Random walk with drift 0.3: the differenced AR(1) sees a constant.
  std::vector<double> y{1.0};
  for (int i = 0; i < 40; ++i) y.push_back(y.back() + 0.3);
  ArFitOptions o;
  o.d = 1;
  const auto m = fit_ar(y, 1, o);
  const auto f = forecast_level(m, y, 2.0);
  CHECK(std::abs(f.mean - (y.back() + 0.3)) < 1e-9);

  // Quadratic trend, d = 2.
  std::vector<double> q;
  for (int i = 0; i < 40; ++i) q.push_back(0.01 * i * i + 0.5 * i);
  o.d = 2;
  const auto m2 = fit_ar(q, 1, o);
  CHECK(std::abs(forecast_level(m2, q, 2.0).mean - (0.01 * 40 * 40 + 0.5 * 40)) < 1e-8);
}

TEST_CASE("acf") {
  std::vector<double> ramp;
  for (int i = 0; i < 50; ++i) ramp.push_back(3.0 + 2.0 * i);
  const auto flat = acf(difference(ramp, 1), 10);
  for (double r : flat.coefficients) CHECK(std::abs(r) < 1e-9);

  std::vector<double> alt;
  for (int i = 0; i < 100; ++i) alt.push_back(i % 2 == 0 ? 1.0 : -1.0);
  const auto a = acf(alt, 20);
  CHECK(a.coefficients.size() == 20);
  CHECK(std::abs(a.coefficients[0] + 1.0) < 0.05);
  CHECK(a.bound == doctest::Approx(0.2));
  CHECK(kind_of([] { acf(std::vector<double>{1, 2, 3}, 3); }) == ErrorKind::SeriesTooShort);
}

TEST_CASE("order selection") {
  const auto y = noise(100, 5);
  const std::vector<OrderCandidate> one{{1, 0}};
  const auto single = select_order(y, one);
  CHECK(single.best == OrderCandidate{1, 0});
  CHECK(single.table.size() == 1);

  const std::vector<double> a{0.6, -0.3};
  const auto ar2 = oracle::simulate_ar(0.2, a, 300, 77, 0.5);
  const std::vector<OrderCandidate> c{{1, 0}, {2, 0}, {5, 0}};
  const auto sel = select_order(ar2, c);
  CHECK((sel.best == OrderCandidate{2, 0} || sel.best == OrderCandidate{5, 0}));
  CHECK(*sel.table[1].rmse <= *sel.table[0].rmse);

  // Order of the candidate list does not matter.
  const std::vector<OrderCandidate> shuffled{{5, 0}, {1, 0}, {2, 0}};
  CHECK(select_order(ar2, shuffled).best == sel.best);

  // Failing candidates are reported inline and skipped.
  const std::vector<OrderCandidate> with_bad{{40, 0}, {1, 0}};
  const auto partial = select_order(std::span<const double>(y).first(30), with_bad);
  CHECK(partial.best == OrderCandidate{1, 0});
  CHECK_FALSE(partial.table[0].rmse.has_value());
  CHECK_FALSE(partial.table[0].error.empty());
  const std::vector<OrderCandidate> all_bad{{40, 0}};
  CHECK(kind_of([&] { select_order(std::span<const double>(y).first(30), all_bad); }) ==
        ErrorKind::SeriesTooShort);
}

TEST_CASE("ties prefer smaller d then smaller p") {
  // An all-zero series leaves every candidate with exactly zero residuals.
  const std::vector<double> y(40, 0.0);
  const std::vector<OrderCandidate> c{{3, 1}, {2, 0}, {1, 1}, {1, 0}};
  CHECK(select_order(y, c).best == OrderCandidate{1, 0});
}

TEST_CASE("noise-free persistent AR recovers its coefficients") {
  for (int p = 1; p <= 5; ++p) {
    const auto a = oracle::persistent_ar_coefficients(p, 100 + static_cast<std::uint64_t>(p));
    const auto y = oracle::simulate_ar(0.7, a, 45, 200 + static_cast<std::uint64_t>(p));
    const auto m = fit_ar(y, p);
    CHECK(std::abs(m.coefficients[0] - 0.7) < 1e-6);
    for (int j = 1; j <= p; ++j) CHECK(std::abs(m.coefficients[j] - a[j - 1]) < 1e-6);
  }
}
