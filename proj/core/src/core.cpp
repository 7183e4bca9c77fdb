#include <cmath>
#include <string>

#include "fraudscore/error.hpp"
#include "fraudscore/forecast.hpp"
#include "fraudscore/types.hpp"

namespace fraudscore {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonPositiveAmount: return "NonPositiveAmount";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::WrongLagCount: return "WrongLagCount";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NoProgress: return "NoProgress";
    case ErrorKind::AllRestartsFailed: return "AllRestartsFailed";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::DegenerateCount: return "DegenerateCount";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::EmptyPath: return "EmptyPath";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnreadableFile: return "UnreadableFile";
    case ErrorKind::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorKind::RejectionOverflow: return "RejectionOverflow";
    case ErrorKind::InsufficientLegitimateData: return "InsufficientLegitimateData";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::UnwritableFile: return "UnwritableFile";
  }
  return "Unknown";
}

std::string_view to_string(Label label) noexcept {
  return label == Label::Legitimate ? "LEGITIMATE" : "FRAUDULENT";
}

TransactionSequence::TransactionSequence(std::vector<Transaction> transactions, Label label)
    : transactions_(std::move(transactions)), label_(label) {
  for (std::size_t i = 0; i < transactions_.size(); ++i) {
    if (transactions_[i].index != i + 1) {
      throw Error(ErrorKind::InvalidArgument,
                  "transaction indices must be contiguous from 1 (position " +
                      std::to_string(i + 1) + " has index " +
                      std::to_string(transactions_[i].index) + ")");
    }
    if (transactions_[i].region == kPaddingRegion) {
      throw Error(ErrorKind::InvalidArgument,
                  "region id 0 is reserved (index " + std::to_string(i + 1) + ")");
    }
  }
}

TransactionSequence TransactionSequence::from_columns(std::span<const double> amounts,
                                                      std::span<const RegionId> regions,
                                                      Label label) {
  if (amounts.size() != regions.size()) {
    throw Error(ErrorKind::InvalidArgument, "amount and region columns differ in length");
  }
  std::vector<Transaction> out;
  out.reserve(amounts.size());
  for (std::size_t i = 0; i < amounts.size(); ++i) {
    out.push_back({amounts[i], regions[i], i + 1});
  }
  return TransactionSequence(std::move(out), label);
}

std::vector<double> TransactionSequence::amounts() const {
  std::vector<double> out;
  out.reserve(transactions_.size());
  for (const auto& t : transactions_) out.push_back(t.amount);
  return out;
}

std::vector<RegionId> TransactionSequence::regions() const {
  std::vector<RegionId> out;
  out.reserve(transactions_.size());
  for (const auto& t : transactions_) out.push_back(t.region);
  return out;
}

TransactionSequence TransactionSequence::slice(std::size_t first, std::size_t count) const {
  if (first + count > transactions_.size()) {
    throw Error(ErrorKind::InvalidArgument, "slice out of range");
  }
  std::vector<Transaction> out(transactions_.begin() + static_cast<std::ptrdiff_t>(first),
                               transactions_.begin() +
                                   static_cast<std::ptrdiff_t>(first + count));
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i + 1;
  return TransactionSequence(std::move(out), label_);
}

ConfidencePoint::ConfidencePoint(double x, double y) : x_(x), y_(y) {
  if (!(x >= 0.0 && x <= 100.0) || !(y >= 0.0 && y <= 100.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "confidence point outside [0,100]^2: (" + std::to_string(x) + ", " +
                    std::to_string(y) + ")");
  }
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (p < 1) fail("p must be >= 1");
  if (d < 0) fail("d must be >= 0");
  if (!(sd_multiplier > 0.0)) fail("sd_multiplier must be > 0");
  if (!(theta_ev >= 0.0 && theta_ev <= 1.0)) fail("theta_ev must lie in [0,1]");
  if (!(theta_xy >= 0.0 && theta_xy <= 100.0)) fail("theta_xy must lie in [0,100]");
  if (row_len < 1) fail("row_len must be >= 1");
  if (window && *window < 2) fail("window must be >= 2");
  if (gp_restarts < 1) fail("gp_restarts must be >= 1");
  if (gp_max_iter < 1) fail("gp_max_iter must be >= 1");
}

std::vector<double> log_transform(std::span<const double> amounts) {
  std::vector<double> out;
  out.reserve(amounts.size());
  for (std::size_t i = 0; i < amounts.size(); ++i) {
    if (!(amounts[i] > 0.0)) {
      throw Error(ErrorKind::NonPositiveAmount,
                  "amount at index " + std::to_string(i + 1) + " is not positive");
    }
    out.push_back(std::log(amounts[i]));
  }
  return out;
}

std::vector<double> log_transform(const TransactionSequence& sequence) {
  const auto amounts = sequence.amounts();
  return log_transform(std::span<const double>(amounts));
}

Forecast make_forecast(double mean, double variance, double sd_multiplier) {
  const double half = sd_multiplier * std::sqrt(variance);
  return {mean, variance, mean - half, mean + half};
}

}  // namespace fraudscore
