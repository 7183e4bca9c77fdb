#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraudscore/data.hpp"
#include "fraudscore/forecast.hpp"
#include "fraudscore/gp.hpp"
#include "fraudscore/types.hpp"

namespace fraudscore::detect {

enum class AmountModel { Ar, Gp };
enum class RegionModel { Assoc, Adj };

std::string_view to_string(AmountModel model) noexcept;
std::string_view to_string(RegionModel model) noexcept;

/// 100 * (1 - Phi((y - E) / sqrt(V))). Throws ZeroVariance unless V > 0.
double amount_confidence(double mean, double variance, double y);

/// Per-transaction amount predictions for one dataset.
///
/// Training transactions get one-step predictions from the model fitted on
/// the training block (AR: fitted lags; GP: conditioning on the preceding
/// training targets only). Test transactions are predicted from everything
/// before them, refitting first under RefitPolicy::Step. Entries are empty
/// where no prediction exists (the first p + d AR points) or the model failed.
struct AmountTrack {
  std::vector<double> log_amounts;
  std::vector<std::optional<Forecast>> forecasts;
  /// Sequential P_EV over the predicted points (empty where no forecast).
  std::vector<std::optional<double>> evp;
  /// Failure message per test position (empty string when scored).
  std::vector<std::string> test_errors;
};

/// Memo of GP fits keyed by the exact training series. Fits are
/// deterministic given the series and options, so sharing them across
/// datasets with identical histories does not change results. Thread-safe.
class GpFitCache {
 public:
  GpFitCache();
  ~GpFitCache();
  GpFitCache(const GpFitCache&) = delete;
  GpFitCache& operator=(const GpFitCache&) = delete;

  gp::GpModel fit(std::span<const double> series, const gp::GpFitOptions& options);
  std::size_t hits() const noexcept;
  std::size_t misses() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

AmountTrack amount_track(const data::Dataset& dataset, AmountModel model,
                         const ModelConfig& config, GpFitCache* cache = nullptr);

/// Region confidence of each test transaction given every region before it.
std::vector<double> region_track(const data::Dataset& dataset, RegionModel model,
                                 const ModelConfig& config);

struct ScoredTransaction {
  int dataset_id = 0;
  Label kind = Label::Legitimate;  // ground truth
  std::size_t position = 1;        // 1..test_len
  std::optional<ConfidencePoint> point;  // empty when UNSCORED
  double evp = 0.0;
  AmountModel amount_model = AmountModel::Ar;
  RegionModel region_model = RegionModel::Assoc;
  std::string failure;

  bool scored() const noexcept { return point.has_value(); }
};

/// Scores the test transactions of one dataset.
std::vector<ScoredTransaction> score_sequence(const data::Dataset& dataset,
                                              AmountModel amount_model,
                                              RegionModel region_model,
                                              const ModelConfig& config,
                                              GpFitCache* cache = nullptr);

/// Combines precomputed tracks; used to score several region models against
/// one amount track.
std::vector<ScoredTransaction> combine_tracks(const data::Dataset& dataset,
                                              const AmountTrack& amount,
                                              AmountModel amount_model,
                                              std::span<const double> region,
                                              RegionModel region_model);

/// FRAUDULENT iff x < theta and y < theta.
Label classify(const ConfidencePoint& point, double theta) noexcept;

struct ThresholdRow {
  double theta = 0.0;
  std::size_t accuracy = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  double accuracy_rate = 0.0;        // accuracy / total
  double false_positive_rate = 0.0;  // false_positive / legitimate total
  double false_negative_rate = 0.0;  // false_negative / fraudulent total
};

struct SweepReport {
  std::vector<ThresholdRow> rows;
  std::size_t total = 0;
  std::size_t legitimate_total = 0;
  std::size_t fraudulent_total = 0;
  std::size_t unscored = 0;
  /// Index into rows of the best theta: highest accuracy, then smallest
  /// |FP - FN|, then smallest theta.
  std::size_t best = 0;
};

inline const std::vector<double> kDefaultThetas{10, 20, 30, 40, 50};

/// Accuracy / FP / FN counts per threshold; UNSCORED points are excluded.
SweepReport sweep(std::span<const ScoredTransaction> scored,
                  std::span<const double> thetas = kDefaultThetas);

enum class OutlierMode { Sd, Evp };

struct OutlierScan {
  AmountTrack track;
  std::vector<bool> flags;
};

/// SD mode flags y > E + sd_multiplier sqrt(V); EVP mode flags P_EV > theta_ev.
/// Points without a forecast are never flagged.
OutlierScan outlier_scan(const data::Dataset& dataset, AmountModel model, OutlierMode mode,
                         const ModelConfig& config, GpFitCache* cache = nullptr);

/// Flags for an already computed track.
std::vector<bool> outlier_flags(const AmountTrack& track, OutlierMode mode,
                                const ModelConfig& config);

}  // namespace fraudscore::detect
