#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fraudscore/ar.hpp"
#include "fraudscore/data.hpp"
#include "fraudscore/detect.hpp"
#include "fraudscore/types.hpp"

namespace fraudscore::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kNumericalFailure = 1, kUsageError = 2 };

struct IngestOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::string amount_column = data::kDefaultAmountColumn;
  std::string region_column = data::kDefaultRegionColumn;
  std::size_t offset = 0;
  std::optional<std::size_t> length;
  std::optional<std::filesystem::path> region_map_output;
};

data::IngestionReport cmd_ingest(const IngestOptions& options, std::ostream& log);

struct FraudOptions {
  std::optional<double> mean;
  std::optional<double> std;
  data::FraudDistribution distribution = data::FraudDistribution::TruncatedNormal;
  std::size_t datasets = 20;
  std::size_t train_len = 100;
  std::size_t block_len = 5;
};

struct GenerateOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::uint64_t seed = 0;
  FraudOptions fraud;
};

data::ExperimentSet cmd_generate(const GenerateOptions& options, std::ostream& log);

/// One (amount model, region model) combination and its results.
struct MethodResult {
  std::string name;  // "method1" .. "method4"
  detect::AmountModel amount_model = detect::AmountModel::Gp;
  detect::RegionModel region_model = detect::RegionModel::Assoc;
  /// False for points re-read from a scored file, which does not store models.
  bool models_known = true;
  std::vector<detect::ScoredTransaction> scored;
  detect::SweepReport report;
};

struct ExperimentOptions {
  /// Raw stream bundle (from `ingest`) or an assembled bundle (from `generate`).
  std::filesystem::path input;
  std::filesystem::path out_dir;
  ModelConfig config;
  FraudOptions fraud;
  std::vector<double> thetas = detect::kDefaultThetas;
  /// Restrict to one amount model; both run by default.
  std::optional<detect::AmountModel> amount_model;
  /// Add the adjacency-matrix variants (four combinations in total).
  bool include_adjacency = false;
  unsigned jobs = 0;  // 0: hardware concurrency
};

struct ExperimentResult {
  data::ExperimentSet datasets;
  std::vector<MethodResult> methods;
};

/// assemble -> score -> sweep, writing datasets.csv, scored_*.csv,
/// sweep_*.csv, report.txt, plots/ and manifest.json under out_dir.
ExperimentResult cmd_experiment(const ExperimentOptions& options, std::ostream& log);

struct ModelSelectOptions {
  std::filesystem::path input;
  std::optional<std::filesystem::path> out_dir;
  std::vector<ar::OrderCandidate> candidates{{1, 1}, {2, 1}, {3, 0}, {4, 0}, {5, 0}};
  std::size_t max_lag = 20;
  /// Number of leading transactions to analyse (the training window).
  std::size_t length = 100;
  LagPadding padding = LagPadding::Drop;
};

struct ModelSelectResult {
  ar::OrderSelection selection;
  ar::AcfResult series_acf;    // ACF of the selected-d differenced log-amounts
  ar::AcfResult residual_acf;  // ACF of the selected model's residuals
};

ModelSelectResult cmd_modelselect(const ModelSelectOptions& options, std::ostream& log);

// File formats.

inline constexpr const char* kScoredHeader = "# fraudscore-scored v1";
inline constexpr const char* kScoredColumns = "dataset_id,kind,pos,x,y,evp,truth";
inline constexpr const char* kSweepHeader = "# fraudscore-sweep v1";
inline constexpr const char* kSweepColumns =
    "method,amount_model,region_model,theta,accuracy,accuracy_rate,false_positive,"
    "false_positive_rate,false_negative,false_negative_rate,total,unscored,best";

void write_scored(std::ostream& out, const std::vector<detect::ScoredTransaction>& scored);
/// Reads the scored-points format back (amount/region model fields are not stored).
std::vector<detect::ScoredTransaction> read_scored(std::istream& in);
void write_sweep_records(std::ostream& out, const MethodResult& method);
/// Aligned text table in the accuracy / false-positive / false-negative layout.
void write_sweep_table(std::ostream& out, const std::vector<MethodResult>& methods);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Parses argv and dispatches; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fraudscore::cli
