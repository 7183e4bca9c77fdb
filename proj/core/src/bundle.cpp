#include "fraudscore/bundle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "fraudscore/error.hpp"

namespace fraudscore::bundle {
namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::MalformedRecord, what); }

template <typename T>
T parse_number(std::string_view field, const char* name) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    malformed(std::string("bad ") + name + " field '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string format_record(const Record& r) {
  char amount[64];
  const auto res = std::to_chars(amount, amount + sizeof amount, r.amount);
  std::string out;
  out += std::to_string(r.dataset_id);
  out += r.kind == Label::Legitimate ? ",L," : ",F,";
  out += std::to_string(r.index);
  out += ',';
  out.append(amount, res.ptr);
  out += ',';
  out += std::to_string(r.region);
  out += r.split == Split::Train ? ",train" : ",test";
  return out;
}

Record parse_record(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto f = split_commas(line);
  if (f.size() != 6) malformed("expected 6 fields, got " + std::to_string(f.size()));
  Record r;
  r.dataset_id = parse_number<int>(f[0], "dataset_id");
  if (f[1] == "L") {
    r.kind = Label::Legitimate;
  } else if (f[1] == "F") {
    r.kind = Label::Fraudulent;
  } else {
    malformed("kind must be L or F, got '" + std::string(f[1]) + "'");
  }
  r.index = parse_number<std::size_t>(f[2], "index");
  r.amount = parse_number<double>(f[3], "amount");
  r.region = parse_number<RegionId>(f[4], "region");
  if (f[5] == "train") {
    r.split = Split::Train;
  } else if (f[5] == "test") {
    r.split = Split::Test;
  } else {
    malformed("split must be train or test, got '" + std::string(f[5]) + "'");
  }
  if (r.dataset_id < 0) malformed("dataset_id must be >= 0");
  if (r.index < 1) malformed("index must be >= 1");
  if (!(r.amount > 0.0) || !std::isfinite(r.amount)) malformed("amount must be positive and finite");
  if (r.region == kPaddingRegion) malformed("region must be >= 1");
  return r;
}

void write_records(std::ostream& out, const std::vector<Record>& records) {
  out << kBundleHeader << '\n' << kBundleColumns << '\n';
  for (const auto& r : records) out << format_record(r) << '\n';
}

std::vector<Record> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kBundleHeader, 0) != 0) {
    malformed(std::string("missing header line '") + kBundleHeader + "'");
  }
  if (!std::getline(in, line) || line.rfind(kBundleColumns, 0) != 0) {
    malformed("missing column line");
  }
  std::vector<Record> records;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      records.push_back(parse_record(line));
    } catch (const Error& e) {
      malformed("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<Record> stream_records(const TransactionSequence& stream) {
  std::vector<Record> out;
  out.reserve(stream.size());
  for (const auto& t : stream.transactions()) {
    out.push_back({0, Label::Legitimate, t.index, t.amount, t.region, Split::Train});
  }
  return out;
}

std::vector<Record> experiment_records(const data::ExperimentSet& set) {
  std::vector<Record> out;
  auto emit = [&](const data::Dataset& ds) {
    for (const auto& t : ds.transactions.transactions()) {
      out.push_back({ds.id, ds.kind, t.index, t.amount, t.region,
                     t.index <= ds.train_len ? Split::Train : Split::Test});
    }
  };
  for (const auto& ds : set.legitimate) emit(ds);
  for (const auto& ds : set.fraudulent) emit(ds);
  return out;
}

Bundle from_records(const std::vector<Record>& records) {
  if (records.empty()) malformed("bundle has no records");
  Bundle bundle;
  const bool has_stream =
      std::any_of(records.begin(), records.end(), [](const Record& r) { return r.dataset_id == 0; });
  if (has_stream) {
    std::vector<Transaction> tx;
    for (const auto& r : records) {
      if (r.dataset_id != 0) malformed("raw stream records mixed with assembled datasets");
      if (r.kind != Label::Legitimate || r.split != Split::Train) {
        malformed("raw stream records must be kind L, split train");
      }
      if (r.index != tx.size() + 1) malformed("raw stream indices must be contiguous from 1");
      tx.push_back({r.amount, r.region, r.index});
    }
    bundle.stream = TransactionSequence(std::move(tx));
    bundle.is_stream = true;
    return bundle;
  }

  struct Accum {
    std::vector<Transaction> tx;
    std::size_t train = 0;
    bool seen_test = false;
  };
  std::map<std::pair<int, int>, Accum> groups;  // (kind, id)
  for (const auto& r : records) {
    auto& g = groups[{r.kind == Label::Legitimate ? 0 : 1, r.dataset_id}];
    if (r.index != g.tx.size() + 1) {
      malformed("dataset " + std::to_string(r.dataset_id) + " indices are not contiguous");
    }
    if (r.split == Split::Train) {
      if (g.seen_test) malformed("train record after test records");
      ++g.train;
    } else {
      g.seen_test = true;
    }
    g.tx.push_back({r.amount, r.region, r.index});
  }

  auto& set = bundle.experiment;
  bool first = true;
  for (auto& [key, g] : groups) {
    const std::size_t test = g.tx.size() - g.train;
    if (g.train == 0 || test == 0) malformed("every dataset needs train and test records");
    if (first) {
      set.train_len = g.train;
      set.block_len = test;
      first = false;
    } else if (g.train != set.train_len || test != set.block_len) {
      malformed("datasets disagree on train/test lengths");
    }
    const Label kind = key.first == 0 ? Label::Legitimate : Label::Fraudulent;
    data::Dataset ds{key.second, kind, TransactionSequence(std::move(g.tx), kind), g.train};
    (kind == Label::Legitimate ? set.legitimate : set.fraudulent).push_back(std::move(ds));
  }
  return bundle;
}

Bundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string());
  return from_records(read_records(in));
}

}  // namespace fraudscore::bundle
