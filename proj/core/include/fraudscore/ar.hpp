#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "fraudscore/forecast.hpp"
#include "fraudscore/types.hpp"

namespace fraudscore::ar {

using ArPrediction = Forecast;

struct ArFitOptions {
  int d = 0;
  /// Use only the most recent `window` observations (before differencing).
  std::optional<std::size_t> window;
  LagPadding padding = LagPadding::Drop;
};

struct ArModel {
  /// (a_0, a_1, ..., a_p); a_j multiplies the value j steps back.
  std::vector<double> coefficients;
  double noise_variance = 0.0;
  int p = 1;
  int d = 0;
  LagPadding padding = LagPadding::Drop;
  /// Regression rows used in the fit.
  std::size_t rows = 0;
};

/// d-fold first differences. Throws SeriesTooShort unless size() > d.
std::vector<double> difference(std::span<const double> series, int d);

/// Conditional least squares on the lag design matrix.
///
/// With LagPadding::Drop the first p observations only serve as lags, so the
/// design has N - p rows; LagPadding::Zero keeps all N rows and fills missing
/// lags with zeros. The coefficients are obtained from an orthogonal
/// decomposition of the design, and noise_variance is the mean squared
/// residual over the rows used.
///
/// Throws SeriesTooShort when fewer than p + 1 rows are available and
/// SingularDesign when cond(X^T X) exceeds 1e12, unless the response is fitted
/// exactly (a degenerate but well-defined case, e.g. a constant series), where
/// the minimum-norm solution is returned.
ArModel fit_ar(std::span<const double> series, int p, const ArFitOptions& options = {});

/// One-step prediction in the model's (differenced) domain. `recent` holds the
/// last p values, most recent last. Throws WrongLagCount otherwise.
ArPrediction predict_next(const ArModel& model, std::span<const double> recent,
                          double sd_multiplier);

/// One-step prediction of the next level from an undifferenced history: the
/// history is differenced d times, predicted, and integrated back.
ArPrediction forecast_level(const ArModel& model, std::span<const double> history,
                            double sd_multiplier);

/// In-sample residuals Y - X*A over the rows the model was fitted on.
std::vector<double> residuals(const ArModel& model, std::span<const double> series,
                              const ArFitOptions& options = {});

/// Estimated white-noise standard deviation, sqrt(noise_variance).
double rmse(const ArModel& model) noexcept;

struct AcfResult {
  std::vector<double> coefficients;  // r_1 .. r_max_lag
  double bound = 0.0;                // 2 / sqrt(N)
};

/// Sample autocorrelations. A zero-variance series yields all zeros.
AcfResult acf(std::span<const double> series, std::size_t max_lag);

struct OrderCandidate {
  int p = 1;
  int d = 0;
  friend bool operator==(const OrderCandidate&, const OrderCandidate&) = default;
};

struct OrderScore {
  OrderCandidate order;
  std::optional<double> rmse;  // empty when the fit failed
  std::string error;
};

struct OrderSelection {
  OrderCandidate best;
  std::vector<OrderScore> table;  // in candidate order
};

/// Minimum-RMSE candidate; ties go to smaller d, then smaller p. Failing
/// candidates are skipped; if every candidate fails, the last error is rethrown.
OrderSelection select_order(std::span<const double> series,
                            std::span<const OrderCandidate> candidates,
                            const ArFitOptions& base_options = {});

}  // namespace fraudscore::ar
