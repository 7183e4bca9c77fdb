#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fraudscore {

using RegionId = std::uint32_t;

/// Region id 0 is reserved for path-matrix padding.
inline constexpr RegionId kPaddingRegion = 0;

enum class Label { Legitimate, Fraudulent };

std::string_view to_string(Label label) noexcept;

struct Transaction {
  double amount = 0.0;
  RegionId region = 1;
  std::size_t index = 1;  // 1-based position within its sequence

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Ordered transactions with contiguous 1-based indices.
class TransactionSequence {
 public:
  TransactionSequence() = default;
  explicit TransactionSequence(std::vector<Transaction> transactions,
                               Label label = Label::Legitimate);

  /// Builds a sequence from parallel amount/region lists, assigning indices 1..N.
  static TransactionSequence from_columns(std::span<const double> amounts,
                                          std::span<const RegionId> regions,
                                          Label label = Label::Legitimate);

  const std::vector<Transaction>& transactions() const noexcept { return transactions_; }
  Label label() const noexcept { return label_; }
  std::size_t size() const noexcept { return transactions_.size(); }
  bool empty() const noexcept { return transactions_.empty(); }
  const Transaction& operator[](std::size_t i) const { return transactions_[i]; }

  std::vector<double> amounts() const;
  std::vector<RegionId> regions() const;

  /// Elements [first, first + count) re-indexed from 1.
  TransactionSequence slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<Transaction> transactions_;
  Label label_ = Label::Legitimate;
};

/// (region confidence, amount confidence), each on a 0-100 scale.
class ConfidencePoint {
 public:
  ConfidencePoint(double x, double y);

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }

  friend bool operator==(const ConfidencePoint&, const ConfidencePoint&) = default;

 private:
  double x_;
  double y_;
};

enum class LagPadding { Drop, Zero };
enum class EvpSide { Folded, Upper };
enum class RefitPolicy { Step, Once };

struct ModelConfig {
  int p = 5;
  int d = 0;
  double sd_multiplier = 2.0;
  double theta_ev = 0.6;
  double theta_xy = 40.0;
  std::optional<std::size_t> window;
  std::size_t row_len = 10;
  std::uint64_t seed = 0;

  LagPadding lag_padding = LagPadding::Drop;
  EvpSide evp_side = EvpSide::Folded;
  RefitPolicy refit = RefitPolicy::Step;
  bool center = false;
  int gp_restarts = 10;
  int gp_max_iter = 2000;
  double gp_tolerance = 1e-8;

  /// Throws InvalidArgument when a field is outside its documented range.
  void validate() const;
};

/// Natural log of every amount; throws NonPositiveAmount on the first amount <= 0.
std::vector<double> log_transform(const TransactionSequence& sequence);
std::vector<double> log_transform(std::span<const double> amounts);

}  // namespace fraudscore
