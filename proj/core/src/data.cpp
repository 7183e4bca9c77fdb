#include "fraudscore/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include "fraudscore/error.hpp"

namespace fraudscore::data {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Reads one CSV record, joining physical lines while a quoted field is open.
bool read_record(std::istream& in, std::string& record) {
  record.clear();
  std::string line;
  bool any = false;
  bool in_quotes = false;
  while (std::getline(in, line)) {
    if (any) record += '\n';
    any = true;
    record += line;
    for (char c : line) {
      if (c == '"') in_quotes = !in_quotes;
    }
    if (!in_quotes) break;
  }
  if (!record.empty() && record.back() == '\r') record.pop_back();
  return any;
}

std::optional<double> parse_amount(std::string_view field) {
  std::string cleaned;
  for (char c : field) {
    if (c == '$' || c == ',' || c == ' ' || c == '\t') continue;
    cleaned += c;
  }
  if (cleaned.empty()) return std::nullopt;
  if (cleaned.front() == '+') cleaned.erase(cleaned.begin());
  double value = 0.0;
  const auto* begin = cleaned.data();
  const auto* end = cleaned.data() + cleaned.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

IngestResult ingest_csv(std::istream& input, const std::string& amount_column,
                        const std::string& region_column) {
  std::string record;
  if (!read_record(input, record)) throw Error(ErrorKind::MissingColumn, "input has no header");
  if (record.rfind("\xEF\xBB\xBF", 0) == 0) record.erase(0, 3);
  const auto header = split_csv_line(record);

  auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in header");
  };
  const std::size_t amount_idx = column_index(amount_column);
  const std::size_t region_idx = column_index(region_column);

  IngestResult result;
  std::vector<Transaction> transactions;
  while (read_record(input, record)) {
    if (trim(record).empty()) continue;
    ++result.report.rows_read;
    const auto fields = split_csv_line(record);
    if (fields.size() <= std::max(amount_idx, region_idx)) {
      ++result.report.rows_dropped;
      continue;
    }
    const auto amount = parse_amount(fields[amount_idx]);
    const std::string region = trim(fields[region_idx]);
    if (!amount || !(*amount > 0.0) || region.empty()) {
      ++result.report.rows_dropped;
      continue;
    }
    auto [it, inserted] = result.report.region_map.try_emplace(
        region, static_cast<RegionId>(result.report.region_labels.size() + 1));
    if (inserted) result.report.region_labels.push_back(region);
    transactions.push_back({*amount, it->second, transactions.size() + 1});
  }
  if (transactions.empty()) {
    throw Error(ErrorKind::EmptyAfterFiltering, "no valid transactions after filtering");
  }
  result.sequence = TransactionSequence(std::move(transactions));
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const std::string& amount_column,
                        const std::string& region_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string());
  return ingest_csv(in, amount_column, region_column);
}

void FraudGenConfig::validate() const {
  if (!(amount_std > 0.0)) throw Error(ErrorKind::InvalidArgument, "fraud amount_std must be > 0");
  if (!std::isfinite(amount_mean)) {
    throw Error(ErrorKind::InvalidArgument, "fraud amount_mean must be finite");
  }
  if (block_len < 1) throw Error(ErrorKind::InvalidArgument, "block_len must be >= 1");
  if (distribution == FraudDistribution::LogNormal && !(amount_mean > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "lognormal fraud amounts need a positive mean");
  }
}

FraudGenConfig FraudGenConfig::from_legitimate(std::span<const double> amounts,
                                               std::size_t block_len) {
  if (amounts.empty()) throw Error(ErrorKind::InvalidArgument, "no legitimate amounts");
  const double n = static_cast<double>(amounts.size());
  const double mean = std::accumulate(amounts.begin(), amounts.end(), 0.0) / n;
  double var = 0.0;
  for (double a : amounts) var += (a - mean) * (a - mean);
  var /= n;
  FraudGenConfig config;
  config.amount_mean = 3.0 * mean;
  config.amount_std = std::sqrt(var);
  config.block_len = block_len;
  return config;
}

std::vector<Transaction> gen_fraud_block(const FraudGenConfig& config,
                                         std::span<const RegionId> legit_regions, Rng& rng) {
  config.validate();
  if (legit_regions.empty()) {
    throw Error(ErrorKind::InvalidArgument, "fraud regions need a legitimate region multiset");
  }

  std::vector<double> amounts;
  amounts.reserve(config.block_len);
  if (config.distribution == FraudDistribution::TruncatedNormal) {
    for (std::size_t i = 0; i < config.block_len; ++i) {
      int rejected = 0;
      double a = rng.normal(config.amount_mean, config.amount_std);
      while (!(a > 0.0)) {
        if (++rejected >= 1000) {
          throw Error(ErrorKind::RejectionOverflow,
                      "1000 consecutive non-positive fraud amounts");
        }
        a = rng.normal(config.amount_mean, config.amount_std);
      }
      amounts.push_back(a);
    }
  } else {
    // Moment-matched lognormal.
    const double ratio = config.amount_std / config.amount_mean;
    const double s2 = std::log1p(ratio * ratio);
    const double mu = std::log(config.amount_mean) - 0.5 * s2;
    for (std::size_t i = 0; i < config.block_len; ++i) {
      amounts.push_back(std::exp(rng.normal(mu, std::sqrt(s2))));
    }
  }

  // Fisher-Yates; the block takes the first block_len entries (cycling when
  // the multiset is shorter than the block).
  std::vector<RegionId> perm(legit_regions.begin(), legit_regions.end());
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }

  std::vector<Transaction> block;
  block.reserve(config.block_len);
  for (std::size_t i = 0; i < config.block_len; ++i) {
    block.push_back({amounts[i], perm[i % perm.size()], i + 1});
  }
  return block;
}

ExperimentSet assemble_datasets(const TransactionSequence& legit,
                                const std::vector<std::vector<Transaction>>& fraud_blocks,
                                std::size_t train_len, std::size_t block_len) {
  const std::size_t count = fraud_blocks.size();
  const std::size_t needed = train_len + count * block_len;
  if (legit.size() < needed) {
    throw Error(ErrorKind::InsufficientLegitimateData,
                "need " + std::to_string(needed) + " legitimate transactions, have " +
                    std::to_string(legit.size()));
  }
  if (train_len == 0 || block_len == 0) {
    throw Error(ErrorKind::InvalidArgument, "train_len and block_len must be positive");
  }

  ExperimentSet set;
  set.train_len = train_len;
  set.block_len = block_len;
  const auto& all = legit.transactions();
  for (std::size_t i = 0; i < count; ++i) {
    if (fraud_blocks[i].size() != block_len) {
      throw Error(ErrorKind::InvalidArgument, "fraud block " + std::to_string(i + 1) +
                                                  " has the wrong length");
    }
    const int id = static_cast<int>(i + 1);

    auto l = legit.slice(i * block_len, train_len + block_len);
    set.legitimate.push_back(
        {id, Label::Legitimate, TransactionSequence(l.transactions(), Label::Legitimate),
         train_len});

    std::vector<Transaction> f(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(train_len));
    for (const auto& t : fraud_blocks[i]) {
      f.push_back({t.amount, t.region, f.size() + 1});
    }
    set.fraudulent.push_back(
        {id, Label::Fraudulent, TransactionSequence(std::move(f), Label::Fraudulent), train_len});
  }
  return set;
}

ExperimentSet generate_experiment(const TransactionSequence& legit, const FraudGenConfig& config,
                                  std::uint64_t seed, std::size_t count, std::size_t train_len) {
  if (legit.size() < train_len) {
    throw Error(ErrorKind::InsufficientLegitimateData, "stream shorter than the training window");
  }
  const auto base = legit.slice(0, train_len).regions();
  std::vector<std::vector<Transaction>> blocks;
  blocks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::substream(seed, "fraud-block", i);
    blocks.push_back(gen_fraud_block(config, base, rng));
  }
  return assemble_datasets(legit, blocks, train_len, config.block_len);
}

}  // namespace fraudscore::data
