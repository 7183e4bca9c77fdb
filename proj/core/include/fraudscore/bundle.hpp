#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fraudscore/data.hpp"

namespace fraudscore::bundle {

/// Format tag on the first line of every bundle file.
inline constexpr const char* kBundleHeader = "# fraudscore-bundle v1";
inline constexpr const char* kBundleColumns = "dataset_id,kind,index,amount,region,split";

enum class Split { Train, Test };

/// One line of a bundle: `dataset_id,kind(L|F),index,amount,region,split(train|test)`.
/// Amounts are written in shortest round-trip form.
struct Record {
  int dataset_id = 0;
  Label kind = Label::Legitimate;
  std::size_t index = 1;
  double amount = 0.0;
  RegionId region = 1;
  Split split = Split::Train;

  friend bool operator==(const Record&, const Record&) = default;
};

std::string format_record(const Record& record);
/// Throws MalformedRecord.
Record parse_record(std::string_view line);

void write_records(std::ostream& out, const std::vector<Record>& records);
/// Throws MalformedRecord (including a missing/unknown header).
std::vector<Record> read_records(std::istream& in);

/// A raw legitimate stream is stored as dataset 0, kind L, all train.
std::vector<Record> stream_records(const TransactionSequence& stream);
std::vector<Record> experiment_records(const data::ExperimentSet& set);

/// Either a raw stream (only dataset 0) or an assembled experiment set.
struct Bundle {
  TransactionSequence stream;
  data::ExperimentSet experiment;
  bool is_stream = false;
};

/// Throws MalformedRecord when datasets are inconsistent (mixed raw and
/// assembled data, non-contiguous indices, missing splits).
Bundle from_records(const std::vector<Record>& records);

Bundle read_bundle(const std::filesystem::path& path);

}  // namespace fraudscore::bundle
