#include "fraudscore/ar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include <Eigen/Dense>

#include "fraudscore/error.hpp"

namespace fraudscore::ar {
namespace {

constexpr double kConditionLimit = 1e12;

std::span<const double> apply_window(std::span<const double> series,
                                     const std::optional<std::size_t>& window) {
  if (window && *window < series.size()) return series.last(*window);
  return series;
}

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Design build_design(std::span<const double> s, int p, LagPadding padding) {
  const auto n = static_cast<Eigen::Index>(s.size());
  const Eigen::Index first = padding == LagPadding::Drop ? p : 0;
  const Eigen::Index rows = n - first;
  if (rows < p + 1) {
    throw Error(ErrorKind::SeriesTooShort,
                "AR(" + std::to_string(p) + ") needs at least " + std::to_string(p + 1) +
                    " regression rows, have " + std::to_string(std::max<Eigen::Index>(rows, 0)));
  }
  Design design{Eigen::MatrixXd::Zero(rows, p + 1), Eigen::VectorXd(rows)};
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index i = first + r;
    design.x(r, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
      if (i - j >= 0) design.x(r, j) = s[static_cast<std::size_t>(i - j)];
    }
    design.y(r) = s[static_cast<std::size_t>(i)];
  }
  return design;
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

std::vector<double> difference(std::span<const double> series, int d) {
  if (d < 0) throw Error(ErrorKind::InvalidArgument, "differencing order must be >= 0");
  if (series.size() <= static_cast<std::size_t>(d)) {
    throw Error(ErrorKind::SeriesTooShort, "series of length " + std::to_string(series.size()) +
                                               " cannot be differenced " + std::to_string(d) +
                                               " times");
  }
  std::vector<double> out(series.begin(), series.end());
  for (int pass = 0; pass < d; ++pass) {
    for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
    out.pop_back();
  }
  return out;
}

ArModel fit_ar(std::span<const double> series, int p, const ArFitOptions& options) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "AR order must be >= 1");
  const auto windowed = apply_window(series, options.window);
  const auto s = difference(windowed, options.d);
  const Design design = build_design(s, p, options.padding);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design.x);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double condition = smin > 0.0 ? (smax / smin) * (smax / smin)
                                      : std::numeric_limits<double>::infinity();

  Eigen::VectorXd coef;
  if (condition <= kConditionLimit) {
    coef = design.x.colPivHouseholderQr().solve(design.y);
  } else {
    // Minimum-norm solution; accepted only when it reproduces Y exactly.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design.x);
    cod.setThreshold(1e-10);
    coef = cod.solve(design.y);
    const double resid = (design.y - design.x * coef).norm();
    if (resid > 1e-10 * (1.0 + design.y.norm())) {
      throw Error(ErrorKind::SingularDesign,
                  "cond(X^T X) = " + std::to_string(condition) + " exceeds 1e12");
    }
  }

  const Eigen::VectorXd resid = design.y - design.x * coef;
  ArModel model;
  model.coefficients.assign(coef.data(), coef.data() + coef.size());
  model.noise_variance = resid.squaredNorm() / static_cast<double>(design.x.rows());
  model.p = p;
  model.d = options.d;
  model.padding = options.padding;
  model.rows = static_cast<std::size_t>(design.x.rows());
  return model;
}

ArPrediction predict_next(const ArModel& model, std::span<const double> recent,
                          double sd_multiplier) {
  if (recent.size() != static_cast<std::size_t>(model.p)) {
    throw Error(ErrorKind::WrongLagCount, "expected " + std::to_string(model.p) +
                                              " lagged values, got " +
                                              std::to_string(recent.size()));
  }
  double mean = model.coefficients[0];
  for (int j = 1; j <= model.p; ++j) {
    mean += model.coefficients[static_cast<std::size_t>(j)] *
            recent[recent.size() - static_cast<std::size_t>(j)];
  }
  return make_forecast(mean, model.noise_variance, sd_multiplier);
}

ArPrediction forecast_level(const ArModel& model, std::span<const double> history,
                            double sd_multiplier) {
  const auto p = static_cast<std::size_t>(model.p);
  const auto d = static_cast<std::size_t>(model.d);
  const std::size_t needed = p + d;
  std::vector<double> tail;
  if (history.size() >= needed) {
    tail.assign(history.end() - static_cast<std::ptrdiff_t>(needed), history.end());
  } else if (model.padding == LagPadding::Zero && history.size() > d) {
    tail.assign(needed - history.size(), 0.0);
    tail.insert(tail.end(), history.begin(), history.end());
  } else {
    throw Error(ErrorKind::SeriesTooShort, "history of length " +
                                               std::to_string(history.size()) +
                                               " is shorter than p + d = " +
                                               std::to_string(needed));
  }
  const auto diffs = difference(tail, model.d);
  auto prediction = predict_next(model, diffs, sd_multiplier);
  double level = 0.0;
  for (int k = 1; k <= model.d; ++k) {
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    level += sign * binomial(model.d, k) * history[history.size() - static_cast<std::size_t>(k)];
  }
  return make_forecast(prediction.mean + level, prediction.variance, sd_multiplier);
}

std::vector<double> residuals(const ArModel& model, std::span<const double> series,
                              const ArFitOptions& options) {
  const auto s = difference(apply_window(series, options.window), options.d);
  const Design design = build_design(s, model.p, options.padding);
  const Eigen::Map<const Eigen::VectorXd> coef(model.coefficients.data(),
                                               static_cast<Eigen::Index>(model.coefficients.size()));
  const Eigen::VectorXd r = design.y - design.x * coef;
  return {r.data(), r.data() + r.size()};
}

double rmse(const ArModel& model) noexcept { return std::sqrt(model.noise_variance); }

AcfResult acf(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n <= max_lag) {
    throw Error(ErrorKind::SeriesTooShort, "ACF up to lag " + std::to_string(max_lag) +
                                               " needs more than " + std::to_string(max_lag) +
                                               " observations");
  }
  AcfResult result;
  result.bound = 2.0 / std::sqrt(static_cast<double>(n));
  result.coefficients.assign(max_lag, 0.0);

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : series) denom += (v - mean) * (v - mean);
  const double scale = std::max(1.0, std::abs(mean));
  if (denom / static_cast<double>(n) <= 1e-24 * scale * scale) return result;

  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) num += (series[t] - mean) * (series[t + k] - mean);
    result.coefficients[k - 1] = num / denom;
  }
  return result;
}

OrderSelection select_order(std::span<const double> series,
                            std::span<const OrderCandidate> candidates,
                            const ArFitOptions& base_options) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidate orders");
  OrderSelection selection;
  std::optional<std::tuple<double, int, int>> best_key;
  std::string last_error;
  ErrorKind last_kind = ErrorKind::SeriesTooShort;
  for (const auto& c : candidates) {
    OrderScore score{c, std::nullopt, {}};
    try {
      ArFitOptions options = base_options;
      options.d = c.d;
      score.rmse = rmse(fit_ar(series, c.p, options));
      const std::tuple<double, int, int> key{*score.rmse, c.d, c.p};
      if (!best_key || key < *best_key) {
        best_key = key;
        selection.best = c;
      }
    } catch (const Error& e) {
      score.error = e.what();
      last_error = e.what();
      last_kind = e.kind();
    }
    selection.table.push_back(std::move(score));
  }
  if (!best_key) {
    throw Error(last_kind, "every candidate order failed; last: " + last_error);
  }
  return selection;
}

}  // namespace fraudscore::ar
