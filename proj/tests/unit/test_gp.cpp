#include <cmath>
#include <numbers>
#include <numeric>

#include <doctest.h>

#include "fraudscore/error.hpp"
#include "fraudscore/gp.hpp"
#include "fraudscore/random.hpp"
#include "oracles.hpp"

using namespace fraudscore;
using namespace fraudscore::gp;

namespace {

std::vector<double> index_inputs(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("kernel values") {
  const KernelParams p{1.0, 1.0, 0.0};
  CHECK(std::abs(kernel(3, 4, p) - 0.606531) < 1e-6);
  const KernelParams q{2.0, 1.5, 0.3};
  CHECK(kernel(5, 5, q) == doctest::Approx(1.5 * 1.5 + 0.3 * 0.3));
  double prev = kernel(0, 0.5, q);
  for (double d = 1.0; d < 40; d += 0.5) {
    const double v = kernel(0, d, q);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(kernel(0, 100, q) < 1e-100);
}

TEST_CASE("gram matrix is exactly symmetric, on and off the integer grid") {
  const KernelParams p{3.3, 0.8, 0.2};
  const std::vector<double> grid = index_inputs(12);
  const std::vector<double> irregular{0.1, 0.7, 2.2, 2.25, 5.0, 9.9};
  for (const auto& x : {grid, irregular}) {
    const auto k = gram_matrix(x, p);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      for (Eigen::Index j = 0; j < k.cols(); ++j) {
        CHECK(k(i, j) == k(j, i));
        CHECK(k(i, j) == kernel(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], p));
      }
    }
  }
}

TEST_CASE("length-scale prior") {
  CHECK(log_length_scale_prior(2.0) == doctest::Approx(std::log(2.0) - 1.0 - std::log(4.0)));
  CHECK(std::isinf(log_length_scale_prior(0.0)));
  CHECK(std::isinf(log_length_scale_prior(-1.0)));
}

TEST_CASE("posterior is marginal likelihood plus the prior") {
  Rng rng(3);
  std::vector<double> y(15);
  for (auto& v : y) v = rng.normal();
  const auto x = index_inputs(15);
  for (double l : {0.5, 2.0, 7.0}) {
    const KernelParams p{l, 1.2, 0.4};
    CHECK(std::abs(log_posterior(p, x, y) - log_marginal_likelihood(p, x, y) -
                   log_length_scale_prior(l)) < 1e-10);
  }
}

TEST_CASE("single observation marginal likelihood") {
  const KernelParams p{1.7, 0.9, 0.35};
  const double expected = -0.5 * std::log(0.81 + 0.35 * 0.35) - 0.5 * std::log(2 * std::numbers::pi);
  CHECK(log_marginal_likelihood(p, std::vector<double>{1.0}, std::vector<double>{0.0}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the prior breaks marginal-likelihood ties toward plausible length-scales") {
  // Far-apart inputs make the likelihood independent of l.
  const std::vector<double> x{1.0, 1000.0};
  const std::vector<double> y{0.3, -0.2};
  const KernelParams a{2.0, 1.0, 0.5}, b{50.0, 1.0, 0.5};
  CHECK(log_marginal_likelihood(a, x, y) == doctest::Approx(log_marginal_likelihood(b, x, y)));
  CHECK(log_posterior(a, x, y) > log_posterior(b, x, y));
}

TEST_CASE("invalid kernel parameters") {
  CHECK_THROWS_AS(KernelParams({0.0, 1.0, 0.1}).validate(), Error);
  CHECK_THROWS_AS(KernelParams({1.0, 0.0, 0.1}).validate(), Error);
  CHECK_THROWS_AS(KernelParams({1.0, 1.0, -0.1}).validate(), Error);
  CHECK_NOTHROW(KernelParams({1.0, 1.0, 0.0}).validate());
}

TEST_CASE("prediction matches explicit inversion") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.normal(0.0, 2.0);
    const KernelParams p{0.3 + 5.0 * rng.uniform(), 0.2 + 2.0 * rng.uniform(),
                         0.05 + 0.5 * rng.uniform()};
    const GpModel m(p, index_inputs(n), y);
    for (double xs : {0.5, 1.0, static_cast<double>(n) / 2, static_cast<double>(n + 1),
                      static_cast<double>(n + 7)}) {
      const auto f = m.predict(xs, 2.0);
      const auto ref = oracle::gp_explicit(index_inputs(n), y, p.length_scale, p.signal_sd,
                                           p.noise_sd, xs);
      CHECK(rel_err(f.mean, ref.mean) < 1e-6);
      CHECK(rel_err(f.variance, std::max(ref.variance, 0.0)) < 1e-6);
      CHECK(f.variance <= p.signal_sd * p.signal_sd + p.noise_sd * p.noise_sd + 1e-10);
    }
  }
}

TEST_CASE("solved alpha reproduces the targets") {
  Rng rng(8);
  std::vector<double> y(25);
  for (auto& v : y) v = rng.normal(4.0, 1.0);
  const KernelParams p{2.5, 1.0, 0.3};
  const GpModel m(p, index_inputs(25), y);
  const Eigen::VectorXd back = gram_matrix(m.inputs(), p) * m.solved_alpha();
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(rel_err(back(static_cast<Eigen::Index>(i)), y[i]) < 1e-6);
}

TEST_CASE("noise-free interpolation and closed forms") {
  const std::vector<double> y{0.4, -1.1, 2.0, 0.7, 0.0, 1.3};
  const KernelParams p{1.3, 1.5, 0.0};
  const GpModel m(p, index_inputs(y.size()), y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(std::abs(m.predict(static_cast<double>(i + 1), 2.0).mean - y[i]) < 1e-6);
  }

  const KernelParams q{2.0, 1.1, 0.4};
  const GpModel one(q, {1.0}, {0.8});
  const double xs = 2.5;
  CHECK(one.predict(xs, 2.0).mean ==
        doctest::Approx(kernel(xs, 1.0, q) * 0.8 / (1.21 + 0.16)));

  const auto far = m.predict(1e4, 2.0);
  CHECK(std::abs(far.mean) < 1e-12);
  CHECK(far.variance == doctest::Approx(1.5 * 1.5));
}

TEST_CASE("prefix predictions condition on earlier targets only") {
  Rng rng(4);
  std::vector<double> y(18);
  for (auto& v : y) v = rng.normal();
  const KernelParams p{2.2, 1.0, 0.3};
  const GpModel full(p, index_inputs(y.size()), y);
  for (std::size_t t = 1; t < y.size(); ++t) {
    const GpModel prefix(p, index_inputs(t), std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(t)));
    const auto a = full.predict_from_prefix(t, 2.0);
    const auto b = prefix.predict(static_cast<double>(t + 1), 2.0);
    CHECK(std::abs(a.mean - b.mean) < 1e-10);
    CHECK(std::abs(a.variance - b.variance) < 1e-10);
  }
  const auto first = full.predict_from_prefix(0, 2.0);
  CHECK(first.mean == 0.0);
  CHECK(first.variance == doctest::Approx(1.0 + 0.09));
}

TEST_CASE("fit keeps the best restart and beats every starting point") {
  Rng rng(12);
  std::vector<double> y(40);
  for (auto& v : y) v = rng.normal(0.0, 0.5);
  GpFitOptions o;
  o.seed = 5;
  const auto m = fit_gp(y, o);
  REQUIRE(m.restarts().size() == 10);
  for (const auto& r : m.restarts()) {
    CHECK(m.log_posterior() >= r.initial_log_posterior - 1e-12);
    if (!r.failed) CHECK(m.log_posterior() >= r.final_log_posterior - 1e-9);
  }
  CHECK(m.log_posterior() ==
        doctest::Approx(log_posterior(m.params(), m.inputs(), m.targets())).epsilon(1e-12));
}

TEST_CASE("fit is deterministic for a seed") {
  Rng rng(1);
  std::vector<double> y(30);
  for (auto& v : y) v = rng.normal(2.0, 0.4);
  GpFitOptions o;
  o.seed = 99;
  const auto a = fit_gp(y, o);
  const auto b = fit_gp(y, o);
  CHECK(a.params().length_scale == b.params().length_scale);
  CHECK(a.params().signal_sd == b.params().signal_sd);
  CHECK(a.params().noise_sd == b.params().noise_sd);
}

TEST_CASE("pure noise: fitted noise level is near the truth") {
  const double s = 0.7;
  Rng rng(31);
  std::vector<double> y(100);
  for (auto& v : y) v = rng.normal(0.0, s);
  GpFitOptions o;
  o.seed = 2;
  const auto m = fit_gp(y, o);
  CHECK(m.params().noise_sd > s / 2);
  CHECK(m.params().noise_sd < s * 2);
}

TEST_CASE("smooth signal: neighbours are correlated") {
  Rng rng(6);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(0.15 * static_cast<double>(i)) + rng.normal(0.0, 0.01);
  GpFitOptions o;
  o.seed = 3;
  const auto m = fit_gp(y, o);
  CHECK(m.params().length_scale > 1.0);
  // An independent-noise explanation scores worse.
  const KernelParams iid{0.01, 1e-3, 0.7};
  CHECK(m.log_posterior() > log_posterior(iid, m.inputs(), y));
}

TEST_CASE("centering adds the mean back") {
  std::vector<double> y(20);
  Rng rng(17);
  for (auto& v : y) v = 5.0 + rng.normal(0.0, 0.3);
  GpFitOptions o;
  o.center = true;
  const auto m = fit_gp(y, o);
  CHECK(m.offset() == doctest::Approx(std::accumulate(y.begin(), y.end(), 0.0) / 20.0));
  CHECK(std::abs(m.predict(1e5, 2.0).mean - m.offset()) < 1e-9);
}

TEST_CASE("fit errors") {
  try {
    fit_gp(std::vector<double>{1.0});
    FAIL("expected SeriesTooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SeriesTooShort);
  }
  // Constant data is still fittable.
  CHECK_NOTHROW(fit_gp(std::vector<double>(10, 3.0)));
}
