#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fraudscore/types.hpp"

namespace fraudscore::evt {

struct GumbelParams {
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t m = 2;
};

/// Location/scale of the Gumbel limit for the maximum of m one-sided
/// standard Gaussian draws. Throws DegenerateCount for m <= 1.
GumbelParams gumbel_params(std::size_t m);

/// Gumbel CDF exp(-exp(-(z - mu)/sigma)).
double evp_given_runlength(double z, const GumbelParams& params) noexcept;

/// P(|N(0,1)| <= z); the exact distribution of the maximum of a single draw.
double one_sided_gaussian_cdf(double z) noexcept;

/// P_EV(z | l = m), using the exact one-sample law for m = 1.
double evp_for_count(double z, std::size_t m);

/// Distribution of the run length (time since the last outlier).
///
/// `mass()[m - 1]` is P(l_t = m). Tail entries below `kPruneBelow` are
/// dropped and the remainder renormalized.
class RunLengthState {
 public:
  static constexpr double kPruneBelow = 1e-18;

  RunLengthState() = default;

  /// Current time t (1-based): the step the next call to evp_step scores.
  std::size_t time() const noexcept { return history_.size() + 1; }
  const std::vector<double>& mass() const noexcept { return mass_; }
  /// P_EV values of the steps taken so far.
  const std::vector<double>& history() const noexcept { return history_; }

  /// Scores z_t, advances to t + 1 and returns P_EV(t).
  double step(double z);

 private:
  std::vector<double> mass_{1.0};
  std::vector<double> history_;
};

/// Functional form of RunLengthState::step.
std::pair<double, RunLengthState> evp_step(RunLengthState state, double z);

/// Strict threshold rule p_ev > theta_ev.
bool is_outlier(double p_ev, double theta_ev) noexcept;

/// |y - E| / sqrt(V) (folded), or max(0, (y - E)/sqrt(V)) for the upper side.
/// Throws ZeroVariance unless V > 0.
double standardize(double y, double mean, double variance, EvpSide side = EvpSide::Folded);

}  // namespace fraudscore::evt
