#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fraudscore::optim {

struct NelderMeadOptions {
  /// Stop once max f - min f over the simplex falls below this.
  double tolerance = 1e-8;
  int max_iter = 2000;
  /// Per-coordinate offsets for the initial simplex; empty means
  /// 5% of each coordinate (0.00025 for zero coordinates).
  std::vector<double> initial_step;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  std::vector<double> point;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  /// Best simplex value after each iteration (nonincreasing).
  std::vector<double> best_history;
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free minimization. Non-finite objective values are treated as
/// +infinity. Throws NoProgress when every vertex of the initial simplex is
/// non-finite.
NelderMeadResult nelder_mead(const Objective& objective, std::vector<double> initial,
                             const NelderMeadOptions& options = {});

}  // namespace fraudscore::optim
