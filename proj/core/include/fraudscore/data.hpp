#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraudscore/random.hpp"
#include "fraudscore/types.hpp"

namespace fraudscore::data {

inline constexpr const char* kDefaultAmountColumn = "Transaction Amount";
inline constexpr const char* kDefaultRegionColumn = "Vendor State/Province";

struct IngestionReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  /// Region label -> id, ids assigned from 1 by first appearance.
  std::map<std::string, RegionId> region_map;
  /// Labels in id order (region_labels[id - 1]).
  std::vector<std::string> region_labels;
};

struct IngestResult {
  TransactionSequence sequence;
  IngestionReport report;
};

/// Splits one CSV record (RFC 4180 quoting) into fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads one transaction per valid row in file order. Rows with a missing or
/// non-positive amount or an empty region are dropped and counted.
/// Throws UnreadableFile, MissingColumn, EmptyAfterFiltering.
IngestResult ingest_csv(const std::filesystem::path& path,
                        const std::string& amount_column = kDefaultAmountColumn,
                        const std::string& region_column = kDefaultRegionColumn);
IngestResult ingest_csv(std::istream& input,
                        const std::string& amount_column = kDefaultAmountColumn,
                        const std::string& region_column = kDefaultRegionColumn);

enum class FraudDistribution { TruncatedNormal, LogNormal };

struct FraudGenConfig {
  double amount_mean = 0.0;
  double amount_std = 1.0;
  std::size_t block_len = 5;
  FraudDistribution distribution = FraudDistribution::TruncatedNormal;

  void validate() const;

  /// Default configuration derived from legitimate amounts:
  /// mean = 3x legitimate mean, std = 1x legitimate (population) std.
  static FraudGenConfig from_legitimate(std::span<const double> amounts,
                                        std::size_t block_len = 5);
};

/// block_len synthetic transactions: amounts from the configured positive
/// distribution, regions from a fresh permutation of `legit_regions`.
/// Indices are 1..block_len. Throws InvalidArgument for empty regions and
/// RejectionOverflow after 1000 consecutive non-positive draws.
std::vector<Transaction> gen_fraud_block(const FraudGenConfig& config,
                                         std::span<const RegionId> legit_regions, Rng& rng);

struct Dataset {
  int id = 1;  // 1-based within its kind
  Label kind = Label::Legitimate;
  TransactionSequence transactions;
  std::size_t train_len = 0;

  std::size_t test_len() const noexcept { return transactions.size() - train_len; }
};

struct ExperimentSet {
  std::vector<Dataset> legitimate;  // dataset L_1..L_n
  std::vector<Dataset> fraudulent;  // dataset F_1..F_n
  std::size_t train_len = 100;
  std::size_t block_len = 5;
};

/// L_i = legit[(i-1)*block_len, +train_len) || A_i and F_i = legit[0, train_len) || B_i.
/// Throws InsufficientLegitimateData when the stream is shorter than
/// train_len + blocks * block_len.
ExperimentSet assemble_datasets(const TransactionSequence& legit,
                                const std::vector<std::vector<Transaction>>& fraud_blocks,
                                std::size_t train_len = 100, std::size_t block_len = 5);

/// Generates `count` fraud blocks (one seeded substream per block) from the
/// first train_len legitimate transactions and assembles the experiment set.
ExperimentSet generate_experiment(const TransactionSequence& legit,
                                  const FraudGenConfig& config, std::uint64_t seed,
                                  std::size_t count = 20, std::size_t train_len = 100);

}  // namespace fraudscore::data
