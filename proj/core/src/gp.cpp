#include "fraudscore/gp.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "fraudscore/error.hpp"
#include "fraudscore/nelder_mead.hpp"
#include "fraudscore/random.hpp"

namespace fraudscore::gp {
namespace {

constexpr double kLn2Pi = 1.8378770664093454835606594728112;
constexpr double kJitterScale = 1e-9;
constexpr double kVarianceFloor = -1e-10;

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

// Cholesky of K, retried once with 1e-9 sigma_f^2 on the diagonal.
Factorization factorize(Eigen::MatrixXd k, const KernelParams& params) {
  Factorization f;
  f.llt.compute(k);
  if (f.llt.info() == Eigen::Success) return f;
  f.jitter = kJitterScale * params.signal_sd * params.signal_sd;
  k.diagonal().array() += f.jitter;
  f.llt.compute(k);
  if (f.llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "Gram matrix is not positive definite");
  }
  return f;
}

double log_likelihood_from(const Factorization& f, const Eigen::VectorXd& y) {
  const Eigen::VectorXd w = f.llt.matrixL().solve(y);
  const double log_det_half = f.llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - log_det_half - 0.5 * static_cast<double>(y.size()) * kLn2Pi;
}

Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

KernelParams from_search(std::span<const double> theta) {
  return {theta[0], std::exp(theta[1]), std::exp(theta[2])};
}

}  // namespace

void KernelParams::validate() const {
  if (!(length_scale > 0.0) || !(signal_sd > 0.0) || !(noise_sd >= 0.0) ||
      !std::isfinite(length_scale) || !std::isfinite(signal_sd) || !std::isfinite(noise_sd)) {
    throw Error(ErrorKind::InvalidArgument,
                "kernel parameters require l > 0, sigma_f > 0, sigma_n >= 0");
  }
}

double kernel(double x, double x_prime, const KernelParams& params) noexcept {
  const double diff = x - x_prime;
  const double sf2 = params.signal_sd * params.signal_sd;
  double value =
      sf2 * std::exp(-(diff * diff) / (2.0 * params.length_scale * params.length_scale));
  if (x == x_prime) value += params.noise_sd * params.noise_sd;
  return value;
}

// Integer inputs on a uniform grid: every difference is exact, so the Gram
// matrix is Toeplitz and one kernel value per lag gives identical entries.
static bool is_integer_grid(std::span<const double> inputs) noexcept {
  if (inputs.size() < 3) return false;
  const double step = inputs[1] - inputs[0];
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double x = inputs[i];
    if (std::abs(x) > 1e15 || x != std::floor(x)) return false;
    if (i > 0 && inputs[i] - inputs[i - 1] != step) return false;
  }
  return true;
}

Eigen::MatrixXd gram_matrix(std::span<const double> inputs, const KernelParams& params) {
  const auto n = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXd k(n, n);
  if (is_integer_grid(inputs)) {
    Eigen::VectorXd by_lag(n);
    for (Eigen::Index lag = 0; lag < n; ++lag) {
      by_lag(lag) = kernel(inputs[static_cast<std::size_t>(lag)], inputs[0], params);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        k(i, j) = by_lag(i - j);
        k(j, i) = by_lag(i - j);
      }
    }
    return k;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = kernel(inputs[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(i)],
                     params);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel(inputs[static_cast<std::size_t>(i)],
                              inputs[static_cast<std::size_t>(j)], params);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double log_length_scale_prior(double length_scale) noexcept {
  if (!(length_scale > 0.0)) return -std::numeric_limits<double>::infinity();
  // Gamma(k = 2, theta = 2): l e^{-l/2} / (Gamma(2) 2^2)
  return std::log(length_scale) - 0.5 * length_scale - std::log(4.0);
}

double log_marginal_likelihood(const KernelParams& params, std::span<const double> inputs,
                               std::span<const double> targets) {
  params.validate();
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "inputs and targets must be nonempty and aligned");
  }
  const auto f = factorize(gram_matrix(inputs, params), params);
  return log_likelihood_from(f, to_vector(targets));
}

double log_posterior(const KernelParams& params, std::span<const double> inputs,
                     std::span<const double> targets) {
  return log_marginal_likelihood(params, inputs, targets) +
         log_length_scale_prior(params.length_scale);
}

GpModel::GpModel(KernelParams params, std::vector<double> inputs, std::vector<double> targets,
                 double offset)
    : params_(params), inputs_(std::move(inputs)), targets_(std::move(targets)), offset_(offset) {
  params_.validate();
  if (inputs_.size() != targets_.size() || inputs_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "inputs and targets must be nonempty and aligned");
  }
  auto f = factorize(gram_matrix(inputs_, params_), params_);
  jitter_ = f.jitter;
  llt_ = std::move(f.llt);
  Eigen::VectorXd y = to_vector(targets_).array() - offset_;
  whitened_ = llt_.matrixL().solve(y);
  alpha_ = llt_.matrixU().solve(whitened_);
  const double log_det_half = llt_.matrixLLT().diagonal().array().log().sum();
  log_posterior_ = -0.5 * whitened_.squaredNorm() - log_det_half -
                   0.5 * static_cast<double>(y.size()) * kLn2Pi +
                   log_length_scale_prior(params_.length_scale);
}

Forecast GpModel::predict(double x_star, double sd_multiplier) const {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k_star(i) = kernel(x_star, inputs_[static_cast<std::size_t>(i)], params_);
  }
  const double mean = offset_ + k_star.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
  double variance = kernel(x_star, x_star, params_) - v.squaredNorm();
  if (variance < kVarianceFloor) {
    throw Error(ErrorKind::NumericalBreakdown,
                "negative predictive variance " + std::to_string(variance));
  }
  if (variance < 0.0) variance = 0.0;
  return make_forecast(mean, variance, sd_multiplier);
}

Forecast GpModel::predict_from_prefix(std::size_t t, double sd_multiplier) const {
  if (t >= inputs_.size()) throw Error(ErrorKind::InvalidArgument, "prefix index out of range");
  const double x_t = inputs_[t];
  const double prior = kernel(x_t, x_t, params_);
  if (t == 0) return make_forecast(offset_, prior, sd_multiplier);
  const auto m = static_cast<Eigen::Index>(t);
  Eigen::VectorXd k(m);
  for (Eigen::Index i = 0; i < m; ++i) k(i) = kernel(x_t, inputs_[static_cast<std::size_t>(i)], params_);
  // The leading block of L is the Cholesky factor of the leading block of K.
  const Eigen::MatrixXd& lmat = llt_.matrixLLT();
  const Eigen::VectorXd v =
      lmat.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(k);
  const double mean = offset_ + v.dot(whitened_.head(m));
  double variance = prior - v.squaredNorm();
  if (variance < kVarianceFloor) {
    throw Error(ErrorKind::NumericalBreakdown,
                "negative predictive variance " + std::to_string(variance));
  }
  if (variance < 0.0) variance = 0.0;
  return make_forecast(mean, variance, sd_multiplier);
}

GpModel fit_gp(std::span<const double> series, const GpFitOptions& options) {
  const std::size_t n = series.size();
  if (n < 2) throw Error(ErrorKind::SeriesTooShort, "GP fit needs at least 2 observations");
  if (options.restarts < 1) throw Error(ErrorKind::InvalidArgument, "restarts must be >= 1");

  std::vector<double> inputs(n);
  for (std::size_t i = 0; i < n; ++i) inputs[i] = static_cast<double>(i + 1);
  std::vector<double> targets(series.begin(), series.end());

  double offset = 0.0;
  if (options.center) {
    for (double v : targets) offset += v;
    offset /= static_cast<double>(n);
  }
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = targets[i] - offset;

  double mean = 0.0, sq = 0.0;
  for (double v : centered) {
    mean += v;
    sq += v * v;
  }
  mean /= static_cast<double>(n);
  const double rms = std::sqrt(sq / static_cast<double>(n));
  const double sd = std::sqrt(std::max(0.0, sq / static_cast<double>(n) - mean * mean));
  const double scale_floor = 1e-6 * std::max(1.0, rms);
  const double signal_scale = std::max(rms, scale_floor);
  const double noise_scale = std::max(sd, scale_floor);

  auto objective = [&](std::span<const double> theta) {
    if (!(theta[0] > 0.0)) return std::numeric_limits<double>::infinity();
    try {
      return -log_posterior(from_search(theta), inputs, centered);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(options.seed);
  std::vector<RestartRecord> records;
  std::optional<std::size_t> best;
  for (int r = 0; r < options.restarts; ++r) {
    RestartRecord rec;
    const double l0 = rng.gamma_int_shape(2, 2.0);
    const double sf0 = signal_scale * std::exp(0.5 * rng.normal());
    const double sn0 = noise_scale * std::exp(0.5 * rng.normal());
    rec.initial = {l0, sf0, sn0};
    const std::vector<double> start{l0, std::log(sf0), std::log(sn0)};
    rec.initial_log_posterior = -objective(start);
    try {
      optim::NelderMeadOptions nm;
      nm.tolerance = options.tolerance;
      nm.max_iter = options.max_iter;
      nm.initial_step = {0.5 * l0, 0.5, 0.5};
      const auto res = optim::nelder_mead(objective, start, nm);
      if (!std::isfinite(res.value)) throw Error(ErrorKind::NoProgress, "no finite optimum");
      rec.final = from_search(res.point);
      rec.final_log_posterior = -res.value;
    } catch (const Error&) {
      rec.failed = true;
    }
    if (!rec.failed && (!best || rec.final_log_posterior > records[*best].final_log_posterior)) {
      best = records.size();
    }
    records.push_back(rec);
  }
  if (!best) throw Error(ErrorKind::AllRestartsFailed, "no restart produced a finite posterior");

  GpModel model(records[*best].final, std::move(inputs), std::move(targets), offset);
  model.restarts_ = std::move(records);
  return model;
}

Forecast predict_gp(const GpModel& model, double x_star, double sd_multiplier) {
  return model.predict(x_star, sd_multiplier);
}

}  // namespace fraudscore::gp
