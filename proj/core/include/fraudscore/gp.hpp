#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fraudscore/forecast.hpp"

namespace fraudscore::gp {

/// Squared-exponential plus white-noise hyperparameters.
struct KernelParams {
  double length_scale = 1.0;
  double signal_sd = 1.0;
  double noise_sd = 0.1;

  /// Throws InvalidArgument unless length_scale > 0, signal_sd > 0, noise_sd >= 0.
  void validate() const;
};

/// sigma_f^2 exp(-(x - x')^2 / (2 l^2)) + sigma_n^2 [x == x'].
double kernel(double x, double x_prime, const KernelParams& params) noexcept;

Eigen::MatrixXd gram_matrix(std::span<const double> inputs, const KernelParams& params);

/// ln of the Gamma(shape 2, scale 2) density; -infinity for l <= 0.
double log_length_scale_prior(double length_scale) noexcept;

/// -1/2 y^T K^-1 y - 1/2 ln|K| - n/2 ln 2pi. Throws NotPositiveDefinite.
double log_marginal_likelihood(const KernelParams& params, std::span<const double> inputs,
                               std::span<const double> targets);

/// Marginal likelihood plus the length-scale prior (flat priors on sigma_f, sigma_n).
double log_posterior(const KernelParams& params, std::span<const double> inputs,
                     std::span<const double> targets);

struct GpFitOptions {
  int restarts = 10;
  std::uint64_t seed = 0;
  int max_iter = 2000;
  double tolerance = 1e-8;
  /// Subtract the training mean before fitting and add it back on prediction.
  bool center = false;
};

/// One optimizer start and where it ended.
struct RestartRecord {
  KernelParams initial;
  double initial_log_posterior = 0.0;
  KernelParams final;
  double final_log_posterior = 0.0;
  bool failed = false;
};

class GpModel {
 public:
  /// Conditions a GP with fixed hyperparameters on (inputs, targets).
  GpModel(KernelParams params, std::vector<double> inputs, std::vector<double> targets,
          double offset = 0.0);

  const KernelParams& params() const noexcept { return params_; }
  const std::vector<double>& inputs() const noexcept { return inputs_; }
  /// Targets as passed in (before any centering offset is removed).
  const std::vector<double>& targets() const noexcept { return targets_; }
  const Eigen::VectorXd& solved_alpha() const noexcept { return alpha_; }
  double offset() const noexcept { return offset_; }
  /// Diagonal jitter that was needed for the factorization (0 if none).
  double jitter() const noexcept { return jitter_; }
  double log_posterior() const noexcept { return log_posterior_; }
  const std::vector<RestartRecord>& restarts() const noexcept { return restarts_; }

  /// Posterior predictive at x_star. Throws NumericalBreakdown when the
  /// variance is below -1e-10; small negative values are clamped to 0.
  Forecast predict(double x_star, double sd_multiplier) const;

  /// Prediction of target t (0-based) conditioned on targets [0, t) only,
  /// reusing this model's hyperparameters and factorization.
  Forecast predict_from_prefix(std::size_t t, double sd_multiplier) const;

 private:
  friend GpModel fit_gp(std::span<const double>, const GpFitOptions&);

  KernelParams params_;
  std::vector<double> inputs_;
  std::vector<double> targets_;
  double offset_ = 0.0;
  double jitter_ = 0.0;
  double log_posterior_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd whitened_;  // L^-1 (y - offset)
  std::vector<RestartRecord> restarts_;
};

/// MAP fit on x = (1, 2, ..., N) by Nelder-Mead over (l, ln sigma_f, ln sigma_n)
/// from `restarts` seeded initializations; the best end point is kept.
/// Throws SeriesTooShort for N < 2 and AllRestartsFailed.
GpModel fit_gp(std::span<const double> series, const GpFitOptions& options = {});

/// Shorthand for GpModel::predict.
Forecast predict_gp(const GpModel& model, double x_star, double sd_multiplier);

}  // namespace fraudscore::gp
