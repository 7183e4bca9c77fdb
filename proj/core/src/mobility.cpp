#include "fraudscore/mobility.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "fraudscore/error.hpp"

namespace fraudscore::mobility {
namespace {

void check_regions(std::span<const RegionId> regions) {
  for (RegionId r : regions) {
    if (r == kPaddingRegion) {
      throw Error(ErrorKind::InvalidArgument, "region id 0 is reserved for padding");
    }
  }
}

}  // namespace

PathMatrix PathMatrix::from_rows(const std::vector<std::vector<RegionId>>& rows,
                                 std::size_t min_width) {
  PathMatrix m;
  for (const auto& row : rows) {
    check_regions(row);
    m.row_len_ = std::max(m.row_len_, row.size());
  }
  if (m.row_len_ == 0) throw Error(ErrorKind::EmptyPath, "path matrix has no regions");
  m.row_len_ = std::max(m.row_len_, min_width);
  for (const auto& row : rows) {
    auto padded = row;
    padded.resize(m.row_len_, kPaddingRegion);
    m.rows_.push_back(std::move(padded));
    m.used_.push_back(row.size());
    for (RegionId r : row) m.region_count_ = std::max(m.region_count_, r);
  }
  return m;
}

std::span<const RegionId> PathMatrix::row(std::size_t i) const {
  return std::span<const RegionId>(rows_.at(i)).first(used_[i]);
}

PathMatrix build_path_matrix(std::span<const RegionId> path, std::size_t row_len) {
  if (path.empty()) throw Error(ErrorKind::EmptyPath, "cannot build a path matrix from no regions");
  if (row_len == 0) throw Error(ErrorKind::InvalidArgument, "row_len must be >= 1");
  std::vector<std::vector<RegionId>> rows;
  for (std::size_t i = 0; i < path.size(); i += row_len) {
    const auto end = std::min(path.size(), i + row_len);
    rows.emplace_back(path.begin() + static_cast<std::ptrdiff_t>(i),
                      path.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return PathMatrix::from_rows(rows, row_len);
}

Pattern::Pattern(std::initializer_list<RegionId> regions)
    : Pattern(std::vector<RegionId>(regions)) {}

Pattern::Pattern(std::vector<RegionId> regions) : regions_(std::move(regions)) {
  if (regions_.empty()) throw Error(ErrorKind::InvalidArgument, "pattern must be nonempty");
  check_regions(regions_);
}

Pattern Pattern::concat(const Pattern& suffix) const {
  std::vector<RegionId> all = regions_;
  all.insert(all.end(), suffix.regions_.begin(), suffix.regions_.end());
  return Pattern(std::move(all));
}

double row_support(std::span<const RegionId> row, const Pattern& pattern) {
  const auto pat = pattern.regions();
  const std::size_t n = pat.size();
  if (row.size() < n) return 0.0;
  if (std::search(row.begin(), row.end(), pat.begin(), pat.end()) != row.end()) return 1.0;
  if (n == 1) return 0.0;

  // For a fixed start, matching each later element at its earliest position
  // gives the shortest span, so the minimum over starts is the minimum span.
  std::size_t best_span = std::numeric_limits<std::size_t>::max();
  for (std::size_t start = 0; start < row.size(); ++start) {
    if (row[start] != pat[0]) continue;
    std::size_t k = 1;
    std::size_t pos = start;
    while (k < n && ++pos < row.size()) {
      if (row[pos] == pat[k]) ++k;
    }
    if (k < n) break;  // later starts cannot succeed either
    best_span = std::min(best_span, pos - start + 1);
  }
  if (best_span == std::numeric_limits<std::size_t>::max()) return 0.0;
  const std::size_t extraneous = best_span - n;
  return 1.0 / (1.0 + static_cast<double>(extraneous));
}

double support(const PathMatrix& matrix, const Pattern& pattern) {
  double total = 0.0;
  for (std::size_t i = 0; i < matrix.row_count(); ++i) total += row_support(matrix.row(i), pattern);
  return total;
}

double rule_confidence(const PathMatrix& matrix, const Pattern& antecedent,
                       const Pattern& consequent) {
  const double base = support(matrix, antecedent);
  if (base == 0.0) return 0.0;
  return 100.0 * support(matrix, antecedent.concat(consequent)) / base;
}

double region_confidence_assoc(const PathMatrix& matrix, std::optional<RegionId> prev,
                               std::optional<RegionId> last, RegionId next) {
  if (!last) return 0.0;
  double best = rule_confidence(matrix, Pattern{*last}, Pattern{next});
  if (prev) {
    best = std::max(best, rule_confidence(matrix, Pattern{*prev}, Pattern{*last, next}));
    best = std::max(best, rule_confidence(matrix, Pattern{*prev, *last}, Pattern{next}));
  }
  return best;
}

AdjacencyMatrix::AdjacencyMatrix(RegionId region_count)
    : region_count_(region_count),
      probs_(static_cast<std::size_t>(region_count) * region_count, 0.0) {}

double AdjacencyMatrix::probability(RegionId from, RegionId to) const noexcept {
  if (from == 0 || to == 0 || from > region_count_ || to > region_count_) return 0.0;
  return probs_[static_cast<std::size_t>(from - 1) * region_count_ + (to - 1)];
}

double AdjacencyMatrix::row_sum(RegionId from) const noexcept {
  double s = 0.0;
  for (RegionId to = 1; to <= region_count_; ++to) s += probability(from, to);
  return s;
}

AdjacencyMatrix build_adjacency(const PathMatrix& matrix) {
  AdjacencyMatrix adj(matrix.region_count());
  const std::size_t rc = matrix.region_count();
  std::vector<double> counts(rc * rc, 0.0);
  std::size_t transitions = 0;
  for (std::size_t i = 0; i < matrix.row_count(); ++i) {
    const auto row = matrix.row(i);
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
      counts[(row[k] - 1) * rc + (row[k + 1] - 1)] += 1.0;
      ++transitions;
    }
  }
  if (transitions == 0) throw Error(ErrorKind::EmptyPath, "path has no transitions");
  for (std::size_t from = 0; from < rc; ++from) {
    double total = 0.0;
    for (std::size_t to = 0; to < rc; ++to) total += counts[from * rc + to];
    if (total == 0.0) continue;
    for (std::size_t to = 0; to < rc; ++to) adj.probs_[from * rc + to] = counts[from * rc + to] / total;
  }
  return adj;
}

AdjacencyMatrix build_adjacency(std::span<const RegionId> path, std::size_t row_len) {
  if (path.size() < 2) throw Error(ErrorKind::EmptyPath, "adjacency needs at least two regions");
  return build_adjacency(build_path_matrix(path, row_len));
}

double region_confidence_adj(const AdjacencyMatrix& matrix, RegionId last, RegionId next) {
  return 100.0 * matrix.probability(last, next);
}

}  // namespace fraudscore::mobility
