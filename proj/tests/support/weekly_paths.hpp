#pragma once

#include <utility>
#include <vector>

#include "fraudscore/mobility.hpp"

namespace fixture {

using fraudscore::RegionId;

// Four weekly region paths of one cardholder, oldest first.
inline const std::vector<std::vector<RegionId>> kWeeklyPaths{
    {7, 1, 1, 2},
    {6, 6, 9, 4, 4, 4, 10, 1, 1},
    {1, 1, 1, 6, 6, 1, 12, 3},
    {8, 11},
};

inline fraudscore::mobility::PathMatrix weekly_matrix() {
  return fraudscore::mobility::PathMatrix::from_rows(kWeeklyPaths);
}

struct ReferenceSupport {
  std::vector<RegionId> pattern;
  double value;
};

// Reference supports of every length-1 and length-2 pattern, rounded to two decimals.
inline const std::vector<ReferenceSupport> kReferenceSupports{
    {{1}, 3}, {{2}, 1}, {{3}, 1}, {{4}, 1}, {{6}, 2}, {{7}, 1},
    {{8}, 1}, {{9}, 1}, {{10}, 1}, {{11}, 1}, {{12}, 1},
    {{1, 1}, 3}, {{1, 2}, 1}, {{1, 3}, 0.5}, {{1, 6}, 1}, {{1, 12}, 1},
    {{4, 1}, 0.5}, {{4, 4}, 1}, {{4, 10}, 1}, {{6, 1}, 1.17}, {{6, 3}, 0.33},
    {{6, 4}, 0.5}, {{6, 6}, 2}, {{6, 9}, 1}, {{6, 10}, 0.2}, {{6, 12}, 0.5},
    {{7, 1}, 1}, {{7, 2}, 0.33}, {{8, 11}, 1}, {{9, 1}, 0.2}, {{9, 4}, 1},
    {{9, 10}, 0.25}, {{10, 1}, 1}, {{12, 3}, 1},
};

}  // namespace fixture
