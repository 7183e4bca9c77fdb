#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "fraudscore/types.hpp"

namespace fraudscore::mobility {

/// Region history laid out as fixed-length rows, each zero-padded at the end.
class PathMatrix {
 public:
  /// Pads each row to max(longest row, min_width). Throws EmptyPath when
  /// there are no regions at all, InvalidArgument for a zero region id.
  static PathMatrix from_rows(const std::vector<std::vector<RegionId>>& rows,
                              std::size_t min_width = 0);

  std::size_t row_count() const noexcept { return rows_.size(); }
  std::size_t row_len() const noexcept { return row_len_; }
  RegionId region_count() const noexcept { return region_count_; }
  const std::vector<std::vector<RegionId>>& rows() const noexcept { return rows_; }
  /// Row without its trailing padding.
  std::span<const RegionId> row(std::size_t i) const;

 private:
  std::vector<std::vector<RegionId>> rows_;
  std::vector<std::size_t> used_;
  std::size_t row_len_ = 0;
  RegionId region_count_ = 0;
};

/// Chunks the path row-major into rows of row_len. Throws EmptyPath.
PathMatrix build_path_matrix(std::span<const RegionId> path, std::size_t row_len);

/// Nonempty ordered region list without padding ids.
class Pattern {
 public:
  Pattern(std::initializer_list<RegionId> regions);
  explicit Pattern(std::vector<RegionId> regions);

  std::span<const RegionId> regions() const noexcept { return regions_; }
  std::size_t size() const noexcept { return regions_.size(); }
  Pattern concat(const Pattern& suffix) const;

 private:
  std::vector<RegionId> regions_;
};

/// Contribution of one row: 1 for a contiguous occurrence, otherwise
/// 1/(1+t) with t the fewest extraneous elements over all order-preserving
/// embeddings, otherwise 0.
double row_support(std::span<const RegionId> row, const Pattern& pattern);

/// Sum of row contributions over the matrix.
double support(const PathMatrix& matrix, const Pattern& pattern);

/// 100 * S(antecedent ++ consequent) / S(antecedent); 0 when S(antecedent) = 0.
double rule_confidence(const PathMatrix& matrix, const Pattern& antecedent,
                       const Pattern& consequent);

/// Max over the rules <prev> -> <last, next>, <prev, last> -> <next> and
/// <last> -> <next>; only the rules whose context is present are evaluated.
double region_confidence_assoc(const PathMatrix& matrix, std::optional<RegionId> prev,
                               std::optional<RegionId> last, RegionId next);

/// Row-normalized first-order transition probabilities over region ids.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(RegionId region_count);

  RegionId region_count() const noexcept { return region_count_; }
  /// P(to | from); 0 for ids outside the matrix or unvisited rows.
  double probability(RegionId from, RegionId to) const noexcept;
  double row_sum(RegionId from) const noexcept;

 private:
  friend AdjacencyMatrix build_adjacency(const PathMatrix& matrix);

  RegionId region_count_ = 0;
  std::vector<double> probs_;  // row-major, (region_count x region_count)
};

/// Counts transitions between consecutive entries of each row (never across
/// rows) and normalizes each row by its outgoing total.
AdjacencyMatrix build_adjacency(const PathMatrix& matrix);
AdjacencyMatrix build_adjacency(std::span<const RegionId> path, std::size_t row_len);

/// 100 * P(next | last); 0 for an unseen source region.
double region_confidence_adj(const AdjacencyMatrix& matrix, RegionId last, RegionId next);

}  // namespace fraudscore::mobility
