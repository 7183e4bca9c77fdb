#include "fraudscore/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>

#include "fraudscore/ar.hpp"
#include "fraudscore/error.hpp"
#include "fraudscore/evt.hpp"
#include "fraudscore/mobility.hpp"

namespace fraudscore::detect {

std::string_view to_string(AmountModel model) noexcept {
  return model == AmountModel::Ar ? "ar" : "gp";
}

std::string_view to_string(RegionModel model) noexcept {
  return model == RegionModel::Assoc ? "assoc" : "adj";
}

double amount_confidence(double mean, double variance, double y) {
  if (!(variance > 0.0)) {
    throw Error(ErrorKind::ZeroVariance, "amount confidence needs a positive variance");
  }
  const double z = (y - mean) / std::sqrt(variance);
  // 1 - Phi(z) = erfc(z / sqrt 2) / 2
  return 50.0 * std::erfc(z / std::numbers::sqrt2);
}

struct GpFitCache::Impl {
  std::mutex mutex;
  std::map<std::vector<double>, gp::GpModel> fits;
  std::size_t hits = 0;
  std::size_t misses = 0;
};

GpFitCache::GpFitCache() : impl_(std::make_unique<Impl>()) {}
GpFitCache::~GpFitCache() = default;

gp::GpModel GpFitCache::fit(std::span<const double> series, const gp::GpFitOptions& options) {
  std::vector<double> key{static_cast<double>(options.restarts),
                          static_cast<double>(options.seed),
                          static_cast<double>(options.max_iter), options.tolerance,
                          options.center ? 1.0 : 0.0};
  key.insert(key.end(), series.begin(), series.end());
  {
    std::lock_guard lock(impl_->mutex);
    if (auto it = impl_->fits.find(key); it != impl_->fits.end()) {
      ++impl_->hits;
      return it->second;
    }
  }
  auto model = gp::fit_gp(series, options);
  std::lock_guard lock(impl_->mutex);
  ++impl_->misses;
  impl_->fits.emplace(std::move(key), model);
  return model;
}

std::size_t GpFitCache::hits() const noexcept { return impl_->hits; }
std::size_t GpFitCache::misses() const noexcept { return impl_->misses; }

namespace {

ar::ArFitOptions ar_options(const ModelConfig& config) {
  return {config.d, config.window, config.lag_padding};
}

gp::GpFitOptions gp_options(const ModelConfig& config) {
  gp::GpFitOptions o;
  o.restarts = config.gp_restarts;
  o.seed = config.seed;
  o.max_iter = config.gp_max_iter;
  o.tolerance = config.gp_tolerance;
  o.center = config.center;
  return o;
}

std::span<const double> fit_window(std::span<const double> history, const ModelConfig& config) {
  if (config.window && *config.window < history.size()) return history.last(*config.window);
  return history;
}

gp::GpModel fit_gp_cached(std::span<const double> series, const ModelConfig& config,
                          GpFitCache* cache) {
  const auto options = gp_options(config);
  return cache ? cache->fit(series, options) : gp::fit_gp(series, options);
}

bool ar_can_forecast(std::size_t history, const ModelConfig& config) {
  const auto p = static_cast<std::size_t>(config.p);
  const auto d = static_cast<std::size_t>(config.d);
  if (config.lag_padding == LagPadding::Zero) return history > d;
  return history >= p + d;
}

void fill_training_ar(AmountTrack& track, std::size_t train_len, const ModelConfig& config,
                      std::optional<ar::ArModel>& model) {
  const std::span<const double> y(track.log_amounts);
  model = ar::fit_ar(y.first(train_len), config.p, ar_options(config));
  for (std::size_t t = 0; t < train_len; ++t) {
    if (!ar_can_forecast(t, config)) continue;
    track.forecasts[t] = ar::forecast_level(*model, y.first(t), config.sd_multiplier);
  }
}

void fill_training_gp(AmountTrack& track, std::size_t train_len, const ModelConfig& config,
                      GpFitCache* cache, std::optional<gp::GpModel>& model) {
  const std::span<const double> y(track.log_amounts);
  model = fit_gp_cached(fit_window(y.first(train_len), config), config, cache);
  const std::size_t start = train_len - model->inputs().size();
  for (std::size_t t = start; t < train_len; ++t) {
    track.forecasts[t] = model->predict_from_prefix(t - start, config.sd_multiplier);
  }
}

Forecast test_forecast_ar(std::span<const double> history, const ModelConfig& config,
                          const std::optional<ar::ArModel>& trained) {
  if (config.refit == RefitPolicy::Once) {
    if (!trained) throw Error(ErrorKind::InvalidArgument, "training fit unavailable");
    return ar::forecast_level(*trained, history, config.sd_multiplier);
  }
  const auto model = ar::fit_ar(history, config.p, ar_options(config));
  return ar::forecast_level(model, history, config.sd_multiplier);
}

Forecast test_forecast_gp(std::span<const double> history, const ModelConfig& config,
                          GpFitCache* cache, const std::optional<gp::GpModel>& trained) {
  const auto window = fit_window(history, config);
  if (config.refit == RefitPolicy::Once) {
    if (!trained) throw Error(ErrorKind::InvalidArgument, "training fit unavailable");
    std::vector<double> inputs(window.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs[i] = static_cast<double>(i + 1);
    const gp::GpModel conditioned(trained->params(), std::move(inputs),
                                  std::vector<double>(window.begin(), window.end()),
                                  trained->offset());
    return conditioned.predict(static_cast<double>(window.size() + 1), config.sd_multiplier);
  }
  const auto model = fit_gp_cached(window, config, cache);
  return model.predict(static_cast<double>(window.size() + 1), config.sd_multiplier);
}

}  // namespace

AmountTrack amount_track(const data::Dataset& dataset, AmountModel model,
                         const ModelConfig& config, GpFitCache* cache) {
  config.validate();
  const std::size_t n = dataset.transactions.size();
  const std::size_t train_len = dataset.train_len;
  if (train_len == 0 || train_len > n) {
    throw Error(ErrorKind::InvalidArgument, "dataset train_len out of range");
  }

  AmountTrack track;
  track.log_amounts = log_transform(dataset.transactions);
  track.forecasts.assign(n, std::nullopt);
  track.evp.assign(n, std::nullopt);
  track.test_errors.assign(n - train_len, {});

  std::optional<ar::ArModel> ar_trained;
  std::optional<gp::GpModel> gp_trained;
  std::string training_error;
  try {
    if (model == AmountModel::Ar) {
      fill_training_ar(track, train_len, config, ar_trained);
    } else {
      fill_training_gp(track, train_len, config, cache, gp_trained);
    }
  } catch (const Error& e) {
    training_error = e.what();
  }

  const std::span<const double> y(track.log_amounts);
  for (std::size_t t = train_len; t < n; ++t) {
    auto& err = track.test_errors[t - train_len];
    if (config.refit == RefitPolicy::Once && !training_error.empty()) {
      err = training_error;
      continue;
    }
    try {
      track.forecasts[t] = model == AmountModel::Ar
                               ? test_forecast_ar(y.first(t), config, ar_trained)
                               : test_forecast_gp(y.first(t), config, cache, gp_trained);
    } catch (const Error& e) {
      err = e.what();
    }
  }

  evt::RunLengthState state;
  for (std::size_t t = 0; t < n; ++t) {
    const auto& f = track.forecasts[t];
    if (!f || !(f->variance > 0.0)) continue;
    track.evp[t] = state.step(evt::standardize(y[t], f->mean, f->variance, config.evp_side));
  }
  return track;
}

std::vector<double> region_track(const data::Dataset& dataset, RegionModel model,
                                 const ModelConfig& config) {
  config.validate();
  const auto regions = dataset.transactions.regions();
  std::vector<double> out;
  for (std::size_t t = dataset.train_len; t < regions.size(); ++t) {
    const std::span<const RegionId> history(regions.data(), t);
    const RegionId next = regions[t];
    double conf = 0.0;
    if (model == RegionModel::Assoc) {
      const auto matrix = mobility::build_path_matrix(history, config.row_len);
      const std::optional<RegionId> prev =
          t >= 2 ? std::optional<RegionId>(history[t - 2]) : std::nullopt;
      conf = mobility::region_confidence_assoc(matrix, prev, history[t - 1], next);
    } else if (history.size() >= 2) {
      try {
        const auto adj = mobility::build_adjacency(history, config.row_len);
        conf = mobility::region_confidence_adj(adj, history[t - 1], next);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::EmptyPath) throw;
      }
    }
    out.push_back(conf);
  }
  return out;
}

std::vector<ScoredTransaction> combine_tracks(const data::Dataset& dataset,
                                              const AmountTrack& amount,
                                              AmountModel amount_model,
                                              std::span<const double> region,
                                              RegionModel region_model) {
  const std::size_t train_len = dataset.train_len;
  const std::size_t tests = dataset.transactions.size() - train_len;
  if (region.size() != tests || amount.test_errors.size() != tests) {
    throw Error(ErrorKind::InvalidArgument, "tracks do not match the dataset");
  }
  std::vector<ScoredTransaction> out;
  out.reserve(tests);
  for (std::size_t j = 0; j < tests; ++j) {
    const std::size_t t = train_len + j;
    ScoredTransaction s;
    s.dataset_id = dataset.id;
    s.kind = dataset.kind;
    s.position = j + 1;
    s.amount_model = amount_model;
    s.region_model = region_model;
    const auto& f = amount.forecasts[t];
    if (!amount.test_errors[j].empty()) {
      s.failure = amount.test_errors[j];
    } else if (!f) {
      s.failure = "no forecast";
    } else {
      try {
        const double y = amount_confidence(f->mean, f->variance, amount.log_amounts[t]);
        // Rule confidences are ratios of nested supports and cannot exceed 100
        // beyond rounding.
        s.point = ConfidencePoint(std::min(region[j], 100.0), y);
        s.evp = amount.evp[t].value_or(0.0);
      } catch (const Error& e) {
        s.failure = e.what();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScoredTransaction> score_sequence(const data::Dataset& dataset,
                                              AmountModel amount_model,
                                              RegionModel region_model,
                                              const ModelConfig& config, GpFitCache* cache) {
  if (dataset.test_len() == 0) throw Error(ErrorKind::InvalidArgument, "dataset has no test data");
  const auto amount = amount_track(dataset, amount_model, config, cache);
  const auto region = region_track(dataset, region_model, config);
  return combine_tracks(dataset, amount, amount_model, region, region_model);
}

Label classify(const ConfidencePoint& point, double theta) noexcept {
  return (point.x() < theta && point.y() < theta) ? Label::Fraudulent : Label::Legitimate;
}

SweepReport sweep(std::span<const ScoredTransaction> scored, std::span<const double> thetas) {
  if (thetas.empty()) throw Error(ErrorKind::InvalidArgument, "no thresholds to sweep");
  SweepReport report;
  for (const auto& s : scored) {
    if (!s.scored()) {
      ++report.unscored;
      continue;
    }
    ++report.total;
    (s.kind == Label::Legitimate ? report.legitimate_total : report.fraudulent_total) += 1;
  }
  auto rate = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  for (double theta : thetas) {
    ThresholdRow row;
    row.theta = theta;
    for (const auto& s : scored) {
      if (!s.scored()) continue;
      const Label verdict = classify(*s.point, theta);
      if (verdict == s.kind) {
        ++row.accuracy;
      } else if (s.kind == Label::Legitimate) {
        ++row.false_positive;
      } else {
        ++row.false_negative;
      }
    }
    row.accuracy_rate = rate(row.accuracy, report.total);
    row.false_positive_rate = rate(row.false_positive, report.legitimate_total);
    row.false_negative_rate = rate(row.false_negative, report.fraudulent_total);
    report.rows.push_back(row);
  }
  auto imbalance = [](const ThresholdRow& r) {
    return r.false_positive > r.false_negative ? r.false_positive - r.false_negative
                                               : r.false_negative - r.false_positive;
  };
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& cand = report.rows[i];
    const auto& best = report.rows[report.best];
    if (cand.accuracy != best.accuracy) {
      if (cand.accuracy > best.accuracy) report.best = i;
    } else if (imbalance(cand) != imbalance(best)) {
      if (imbalance(cand) < imbalance(best)) report.best = i;
    } else if (cand.theta < best.theta) {
      report.best = i;
    }
  }
  return report;
}

std::vector<bool> outlier_flags(const AmountTrack& track, OutlierMode mode,
                                const ModelConfig& config) {
  std::vector<bool> flags(track.log_amounts.size(), false);
  for (std::size_t t = 0; t < flags.size(); ++t) {
    if (mode == OutlierMode::Sd) {
      const auto& f = track.forecasts[t];
      flags[t] = f && track.log_amounts[t] > f->mean + config.sd_multiplier * std::sqrt(f->variance);
    } else {
      flags[t] = track.evp[t] && evt::is_outlier(*track.evp[t], config.theta_ev);
    }
  }
  return flags;
}

OutlierScan outlier_scan(const data::Dataset& dataset, AmountModel model, OutlierMode mode,
                         const ModelConfig& config, GpFitCache* cache) {
  OutlierScan scan;
  scan.track = amount_track(dataset, model, config, cache);
  scan.flags = outlier_flags(scan.track, mode, config);
  return scan;
}

}  // namespace fraudscore::detect
