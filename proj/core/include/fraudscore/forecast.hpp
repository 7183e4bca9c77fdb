#pragma once

namespace fraudscore {

/// Gaussian predictive distribution for the next log-amount.
struct Forecast {
  double mean = 0.0;
  double variance = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Fills lower/upper as mean -/+ sd_multiplier * sqrt(variance).
Forecast make_forecast(double mean, double variance, double sd_multiplier);

}  // namespace fraudscore
